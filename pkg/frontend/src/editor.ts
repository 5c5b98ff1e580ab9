// In-place editor rendering: blocks as paragraphs, variation components as
// inline highlighted spans showing their selected (or hover-previewed)
// variation, visually continuous with the surrounding prose.

import type { BlockInfo, ComponentEntry, DocumentInfo } from "./api.js";
import { variationLetter } from "./letters.js";
import type { ViewState } from "./state.js";

export interface EditorActions {
  activate(componentId: string): void;
  saveVariationText(componentId: string, variationId: string, text: string): void;
  beginInsert(blockId: string, offset: number, prompt: string): void;
}

export interface ToolbarActions {
  hover(componentId: string, variationId: string): void;
  unhover(): void;
  select(componentId: string, variationId: string): void;
  removeVariation(componentId: string, variationId: string): void;
}

export function blockServerText(block: BlockInfo): string {
  let text = "";
  for (const run of block.runs) {
    if (run.type === "text") text += run.text;
    else {
      const selected = run.component.variations.find(
        (v) => v.id === run.component.selected_id);
      text += selected ? selected.text : "";
    }
  }
  return text;
}

export function editorText(container: HTMLElement): string {
  const blocks = [...container.querySelectorAll<HTMLElement>("[data-block-id]")];
  return blocks.map((b) => b.textContent ?? "").join("\n");
}

export function componentSpan(container: HTMLElement,
                              componentId: string): HTMLElement | null {
  return container.querySelector(`[data-component-id="${componentId}"]`);
}

function renderBlockContent(paragraph: HTMLElement, block: BlockInfo,
                            state: ViewState): void {
  paragraph.textContent = "";
  for (const run of block.runs) {
    if (run.type === "text") {
      paragraph.appendChild(document.createTextNode(run.text));
      continue;
    }
    const component = run.component;
    const span = document.createElement("span");
    span.className = "variation-component";
    span.dataset.componentId = component.id;
    if (state.activeComponentId === component.id) span.classList.add("active");
    const preview = state.hoverPreview;
    const showId = preview && preview.componentId === component.id
      ? preview.variationId : component.selected_id;
    const shown = component.variations.find((v) => v.id === showId);
    span.textContent = shown ? shown.text : "";
    span.setAttribute("contenteditable", "true");
    paragraph.appendChild(span);
  }
  if (block.runs.length === 0) paragraph.appendChild(document.createTextNode(""));
}

export function renderEditor(container: HTMLElement, doc: DocumentInfo,
                             state: ViewState, actions: EditorActions): void {
  container.textContent = "";
  for (const block of doc.blocks) {
    const paragraph = document.createElement("p");
    paragraph.className = "block";
    paragraph.dataset.blockId = block.id;
    paragraph.setAttribute("contenteditable", "true");
    renderBlockContent(paragraph, block, state);

    paragraph.addEventListener("keydown", (event) => {
      if ((event as KeyboardEvent).key !== "Enter") return;
      event.preventDefault();
      maybeBeginInsert(paragraph, actions);
    });
    paragraph.addEventListener("click", (event) => {
      const span = (event.target as HTMLElement).closest?.("[data-component-id]");
      if (span instanceof HTMLElement && span.dataset.componentId) {
        actions.activate(span.dataset.componentId);
      }
    });
    paragraph.addEventListener("focusout", (event) => {
      const span = event.target as HTMLElement;
      if (!(span instanceof HTMLElement) || !span.dataset.componentId) return;
      if (state.hoverPreview?.componentId === span.dataset.componentId) return;
      const block2 = doc.blocks.find((b) => b.id === block.id);
      if (!block2) return;
      const run = block2.runs.find(
        (r) => r.type === "component" && r.component.id === span.dataset.componentId);
      if (!run || run.type !== "component") return;
      const selected = run.component.variations.find(
        (v) => v.id === run.component.selected_id);
      const current = span.textContent ?? "";
      if (selected && current !== selected.text) {
        actions.saveVariationText(run.component.id, run.component.selected_id, current);
      }
    });
    container.appendChild(paragraph);
  }
}

// "@ai <prompt>" + Enter starts a streamed insert at the spot where the
// command begins; everything from "@ai" to the end of the block is the
// prompt, and the typed command itself never reaches the server.
function maybeBeginInsert(paragraph: HTMLElement, actions: EditorActions): void {
  const text = paragraph.textContent ?? "";
  const at = text.indexOf("@ai");
  if (at < 0) return;
  const prompt = text.slice(at + "@ai".length).trim();
  if (!prompt) return;
  const blockId = paragraph.dataset.blockId;
  if (blockId) actions.beginInsert(blockId, at, prompt);
}

export function restoreBlock(paragraph: HTMLElement, block: BlockInfo,
                             state: ViewState): void {
  renderBlockContent(paragraph, block, state);
}

/** Insert a node at a character offset of the block's flattened text,
 * never inside a component span. */
export function injectAtOffset(paragraph: HTMLElement, offset: number,
                               node: Node): void {
  let pos = 0;
  const children = [...paragraph.childNodes];
  for (const child of children) {
    const size = child.textContent?.length ?? 0;
    if (child.nodeType === Node.TEXT_NODE && offset <= pos + size) {
      const textNode = child as Text;
      const split = textNode.splitText(offset - pos);
      paragraph.insertBefore(node, split);
      return;
    }
    if (child.nodeType !== Node.TEXT_NODE && offset === pos) {
      paragraph.insertBefore(node, child);
      return;
    }
    pos += size;
  }
  paragraph.appendChild(node);
}

export function renderToolbar(toolbar: HTMLElement, entry: ComponentEntry | null,
                              anchor: HTMLElement | null,
                              actions: ToolbarActions): void {
  toolbar.textContent = "";
  if (!entry || !anchor) {
    toolbar.hidden = true;
    delete toolbar.dataset.componentId;
    return;
  }
  toolbar.hidden = false;
  toolbar.dataset.componentId = entry.component_id;
  const rect = anchor.getBoundingClientRect();
  toolbar.style.left = `${rect.left}px`;
  toolbar.style.top = `${rect.top - 34}px`;

  entry.variations.forEach((variation, index) => {
    const cell = document.createElement("span");
    cell.className = "hover-cell";

    const pick = document.createElement("button");
    pick.type = "button";
    pick.className = "hover-button";
    pick.dataset.variationId = variation.id;
    pick.textContent = variationLetter(index);
    if (variation.selected) pick.classList.add("selected");
    pick.title = variation.text;
    pick.addEventListener("mouseenter",
                          () => actions.hover(entry.component_id, variation.id));
    pick.addEventListener("mouseleave", () => actions.unhover());
    pick.addEventListener("click",
                          () => actions.select(entry.component_id, variation.id));
    cell.appendChild(pick);

    const trash = document.createElement("button");
    trash.type = "button";
    trash.className = "hover-trash";
    trash.dataset.variationId = variation.id;
    trash.textContent = "\u{1f5d1}";
    trash.disabled = entry.variations.length < 2;
    trash.addEventListener("click",
                           () => actions.removeVariation(entry.component_id, variation.id));
    cell.appendChild(trash);

    toolbar.appendChild(cell);
  });
}
