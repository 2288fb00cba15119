/** Hand-authored tree payloads for backend-free view tests. */

import type { InitialView, TreeNodeData } from "../src/api";

export function sampleTree(): { nodes: TreeNodeData[]; initialView: InitialView } {
  const nodes: TreeNodeData[] = [
    {
      id: "n0000",
      role: "root",
      members: ["animal"],
      representative: "animal",
      parent: null,
      children: ["n0001", "n0002", "n0004"],
      photo_nodes: [
        { photo_id: "a01", score: 0.09 },
        { photo_id: "a02", score: 0.09 },
      ],
    },
    {
      id: "n0001",
      role: "child",
      members: ["bird"],
      representative: "bird",
      parent: "n0000",
      children: [],
      photo_nodes: [{ photo_id: "b01", score: 0.375 }],
    },
    {
      id: "n0002",
      role: "hub",
      members: ["cat", "dog"],
      representative: "cat",
      parent: "n0000",
      children: ["n0003"],
      photo_nodes: [
        { photo_id: "a01", score: 0.25 },
        { photo_id: "a02", score: 0.25 },
      ],
    },
    {
      id: "n0003",
      role: "child",
      members: ["kitten"],
      representative: "kitten",
      parent: "n0002",
      children: [],
      photo_nodes: [],
    },
    {
      id: "n0004",
      role: "child",
      members: ["forest", "lake", "nature"],
      representative: "lake",
      parent: "n0000",
      children: [],
      photo_nodes: [{ photo_id: "e02", score: 0.575 }],
    },
  ];
  const initialView: InitialView = {
    nodes: ["n0000", "n0002"],
    photo_nodes: [
      { node_id: "n0002", photo_id: "a01" },
      { node_id: "n0002", photo_id: "a02" },
    ],
  };
  return { nodes, initialView };
}
