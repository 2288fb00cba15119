/**
 * The action bar: the four operation buttons plus dismiss, a node-search
 * text field, a region field, the selected-keyword chips, and a status line
 * for inline notices. Each control disables itself while its action is in
 * flight so session mutations never interleave.
 */

export interface ControlsCallbacks {
  onShowChildren: () => Promise<void>;
  onSelectNode: () => Promise<void>;
  onSearchNodes: (text: string) => Promise<void>;
  onSearchSpots: (region: string) => Promise<void>;
  onDismissNode: () => void;
  onDeselectKeyword: (keyword: string) => Promise<void>;
}

export class Controls {
  private readonly statusLine: HTMLElement;
  private readonly keywordBox: HTMLElement;
  readonly searchInput: HTMLInputElement;
  readonly regionInput: HTMLInputElement;
  private readonly buttons: HTMLButtonElement[] = [];

  constructor(container: HTMLElement, private readonly callbacks: ControlsCallbacks) {
    const bar = document.createElement("div");
    bar.className = "controls";
    container.appendChild(bar);

    this.searchInput = this.input(bar, "search-input", "keyword text");
    this.regionInput = this.input(bar, "region-input", "region, e.g. Hokkaido");

    this.button(bar, "SHOW CHILD NODE", "btn-expand", () => callbacks.onShowChildren());
    this.button(bar, "SELECT NODE", "btn-select", () => callbacks.onSelectNode());
    this.button(bar, "SEARCH NODE BY KEYWORDS", "btn-search", () =>
      callbacks.onSearchNodes(this.searchInput.value),
    );
    this.button(bar, "SEARCH SPOTS", "btn-spots", () =>
      callbacks.onSearchSpots(this.regionInput.value),
    );
    this.button(bar, "DISMISS NODE", "btn-dismiss", async () => callbacks.onDismissNode());

    this.keywordBox = document.createElement("div");
    this.keywordBox.className = "selected-keywords";
    container.appendChild(this.keywordBox);

    this.statusLine = document.createElement("div");
    this.statusLine.className = "status-line";
    this.statusLine.setAttribute("role", "status");
    container.appendChild(this.statusLine);
  }

  private input(parent: HTMLElement, cls: string, placeholder: string): HTMLInputElement {
    const el = document.createElement("input");
    el.className = cls;
    el.placeholder = placeholder;
    parent.appendChild(el);
    return el;
  }

  private button(
    parent: HTMLElement,
    label: string,
    cls: string,
    action: () => Promise<void>,
  ): void {
    const el = document.createElement("button");
    el.textContent = label;
    el.className = cls;
    el.addEventListener("click", () => {
      if (el.disabled) return;
      el.disabled = true;
      action()
        .catch((err) => this.status(err instanceof Error ? err.message : String(err)))
        .finally(() => {
          el.disabled = false;
        });
    });
    parent.appendChild(el);
    this.buttons.push(el);
  }

  status(message: string): void {
    this.statusLine.textContent = message;
  }

  showKeywords(keywords: string[]): void {
    this.keywordBox.replaceChildren();
    for (const keyword of keywords) {
      const chip = document.createElement("span");
      chip.className = "keyword-chip";
      chip.textContent = keyword;
      chip.title = "click to deselect";
      chip.addEventListener("click", () => {
        void this.callbacks.onDeselectKeyword(keyword);
      });
      this.keywordBox.appendChild(chip);
    }
  }
}
