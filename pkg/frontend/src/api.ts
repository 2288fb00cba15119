/**
 * Typed client for the exploration service.
 *
 * The UI never computes clusters, scores, or rankings itself: every ordered
 * list rendered anywhere comes verbatim from one of these responses. Tests
 * intercept the fetch function to assert that byte-traceability.
 */

export type NodeRole = "root" | "hub" | "child";

export interface PhotoNodeRef {
  photo_id: string;
  score: number;
}

export interface TreeNodeData {
  id: string;
  role: NodeRole;
  members: string[];
  representative: string;
  parent: string | null;
  children: string[];
  photo_nodes: PhotoNodeRef[];
}

export interface InitialView {
  nodes: string[];
  photo_nodes: { node_id: string; photo_id: string }[];
}

export interface TreeResponse {
  format_version: number;
  nodes: TreeNodeData[];
  params: Record<string, unknown>;
  initial_view: InitialView;
}

export interface SelectionState {
  session_id: string;
  selected_keywords: string[];
  selected_node_ids: string[];
}

export interface SpotDetailsData {
  description: string;
  address: string | null;
  url: string | null;
}

export interface SpotData {
  spot_id: string;
  name: string;
  lat: number;
  lng: number;
  nearby_count: number;
  relevance: number;
  review_score: number | null;
  member_photo_ids: string[];
  details: SpotDetailsData | null;
}

export interface SpotsResponse {
  region: string;
  keywords: string[];
  spots: SpotData[];
}

export interface SpotsRequestBody {
  session_id: string;
  region: string;
  keywords?: string[];
  provider_mode?: "photo_search" | "place_search";
  ranking_mode?: "review_score" | "keyword_relevance" | "photo_count";
  limit?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json();
    if (!response.ok) {
      const code = typeof body?.code === "string" ? body.code : "error";
      const message = typeof body?.message === "string" ? body.message : response.statusText;
      throw new ApiError(response.status, code, message);
    }
    return body as T;
  }

  getTree(): Promise<TreeResponse> {
    return this.request<TreeResponse>("/api/tree");
  }

  async getChildren(nodeId: string): Promise<TreeNodeData[]> {
    const body = await this.request<{ nodes: TreeNodeData[] }>(
      `/api/nodes/${encodeURIComponent(nodeId)}/children`,
    );
    return body.nodes;
  }

  async searchNodes(text: string): Promise<TreeNodeData[]> {
    const body = await this.request<{ nodes: TreeNodeData[] }>(
      `/api/nodes?query=${encodeURIComponent(text)}`,
    );
    return body.nodes;
  }

  selectNode(sessionId: string, nodeId: string): Promise<SelectionState> {
    return this.request<SelectionState>(
      `/api/sessions/${encodeURIComponent(sessionId)}/selection`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ node_id: nodeId }),
      },
    );
  }

  selectPhoto(
    sessionId: string,
    photoId: string,
    nodeId?: string,
  ): Promise<SelectionState> {
    const payload: Record<string, string> = { photo_id: photoId };
    if (nodeId !== undefined) payload.node_id = nodeId;
    return this.request<SelectionState>(
      `/api/sessions/${encodeURIComponent(sessionId)}/selection`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(payload),
      },
    );
  }

  deselect(sessionId: string, keyword: string): Promise<SelectionState> {
    return this.request<SelectionState>(
      `/api/sessions/${encodeURIComponent(sessionId)}/selection/${encodeURIComponent(keyword)}`,
      { method: "DELETE" },
    );
  }

  searchSpots(body: SpotsRequestBody): Promise<SpotsResponse> {
    return this.request<SpotsResponse>("/api/spots", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  photoUrl(photoId: string): string {
    return `${this.baseUrl}/api/photos/${encodeURIComponent(photoId)}`;
  }
}
