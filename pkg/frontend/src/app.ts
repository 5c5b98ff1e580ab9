// Application shell: owns server snapshots (document, components, buttons),
// re-fetches after every mutation round-trip, and keeps the editor,
// toolbar, accordion, and AI panel rendering from the same client state so
// their selections can never disagree.

import { ApiClient } from "./api.js";
import type { BlockInfo, ButtonInfo, ComponentEntry, DocumentInfo } from "./api.js";
import { renderAccordion } from "./accordion.js";
import { renderAiPanel } from "./aiPanel.js";
import {
  componentSpan,
  editorText,
  renderEditor,
  renderToolbar,
} from "./editor.js";
import { InsertFlow } from "./insertFlow.js";
import { ViewState } from "./state.js";

export class AbscribeApp {
  state = new ViewState();
  doc: DocumentInfo | null = null;
  components: ComponentEntry[] = [];
  buttons: ButtonInfo[] = [];
  insertFlow: InsertFlow;
  promptForRevision: () => string | null = () =>
    (globalThis as { prompt?: (message: string) => string | null })
      .prompt?.("Revise the prompt:") ?? null;

  readonly editorEl: HTMLElement;
  readonly toolbarEl: HTMLElement;
  readonly accordionEl: HTMLElement;
  readonly panelEl: HTMLElement;
  readonly toastEl: HTMLElement;

  constructor(root: HTMLElement, public api: ApiClient) {
    root.textContent = "";
    root.className = "abscribe-root";
    this.editorEl = el("div", "editor");
    this.toolbarEl = el("div", "hover-toolbar");
    this.toolbarEl.hidden = true;
    this.accordionEl = el("aside", "accordion");
    this.panelEl = el("section", "ai-panel");
    this.toastEl = el("div", "toast");
    this.toastEl.hidden = true;
    const mainCol = el("main", "editor-column");
    mainCol.appendChild(this.editorEl);
    const sideCol = el("div", "side-column");
    sideCol.appendChild(this.accordionEl);
    sideCol.appendChild(this.panelEl);
    root.appendChild(this.toolbarEl);
    root.appendChild(mainCol);
    root.appendChild(sideCol);
    root.appendChild(this.toastEl);

    this.insertFlow = new InsertFlow(this.api, this.state, {
      documentId: () => this.doc?.id ?? "",
      blockById: (blockId) => this.blockById(blockId),
      blockElement: (blockId) =>
        this.editorEl.querySelector(`[data-block-id="${blockId}"]`),
      promptForRevision: () => this.promptForRevision(),
      afterAccept: () => this.refresh(),
      notify: (message) => this.toast(message),
    });
  }

  blockById(blockId: string): BlockInfo | undefined {
    return this.doc?.blocks.find((b) => b.id === blockId);
  }

  componentEntry(componentId: string): ComponentEntry | undefined {
    return this.components.find((c) => c.component_id === componentId);
  }

  async open(documentId: string): Promise<void> {
    this.doc = await this.api.getDocument(documentId);
    await this.refresh();
  }

  async refresh(): Promise<void> {
    if (!this.doc) return;
    const [doc, components, buttons] = await Promise.all([
      this.api.getDocument(this.doc.id),
      this.api.components(this.doc.id),
      this.api.buttons(),
    ]);
    this.doc = doc;
    this.components = components;
    this.buttons = buttons;
    this.state.seeComponents(components.map((c) => c.component_id));
    this.renderAll();
  }

  renderAll(): void {
    if (!this.doc) return;
    renderEditor(this.editorEl, this.doc, this.state, {
      activate: (componentId) => this.activate(componentId),
      saveVariationText: (componentId, variationId, text) =>
        void this.saveVariationText(componentId, variationId, text),
      beginInsert: (blockId, offset, prompt) =>
        void this.insertFlow.begin(blockId, offset, prompt),
    });
    this.renderToolbar();
    renderAccordion(this.accordionEl, this.components, this.state, {
      activate: (componentId) => this.activate(componentId),
      select: (componentId, variationId) =>
        void this.select(componentId, variationId),
      toggle: (componentId) => {
        if (this.state.accordionExpanded.has(componentId)) {
          this.state.accordionExpanded.delete(componentId);
        } else {
          this.state.accordionExpanded.add(componentId);
        }
        this.renderAll();
      },
    });
    renderAiPanel(this.panelEl, this.buttons, {
      submitPrompt: (text) => void this.adhoc(text),
      applyButton: (buttonId) => void this.applyButton(buttonId),
      saveButton: (buttonId, fields) => void this.saveButton(buttonId, fields),
      deleteButton: (buttonId) => void this.deleteButton(buttonId),
    });
  }

  private renderToolbar(): void {
    const active = this.state.activeComponentId;
    const entry = active ? this.componentEntry(active) ?? null : null;
    const anchor = active ? componentSpan(this.editorEl, active) : null;
    renderToolbar(this.toolbarEl, entry, anchor, {
      hover: (componentId, variationId) => this.hover(componentId, variationId),
      unhover: () => this.unhover(),
      select: (componentId, variationId) =>
        void this.select(componentId, variationId),
      removeVariation: (componentId, variationId) =>
        void this.removeVariation(componentId, variationId),
    });
  }

  activate(componentId: string): void {
    this.state.activeComponentId = componentId;
    this.renderAll();
  }

  // Hover previews are pure DOM: swap one span's text, no requests at all.
  hover(componentId: string, variationId: string): void {
    const entry = this.componentEntry(componentId);
    const variation = entry?.variations.find((v) => v.id === variationId);
    const span = componentSpan(this.editorEl, componentId);
    if (!entry || !variation || !span) return;
    this.state.hoverPreview = { componentId, variationId };
    span.textContent = variation.text;
    span.classList.add("previewing");
  }

  unhover(): void {
    const preview = this.state.hoverPreview;
    if (!preview) return;
    this.state.hoverPreview = null;
    const entry = this.componentEntry(preview.componentId);
    const span = componentSpan(this.editorEl, preview.componentId);
    if (!entry || !span) return;
    const selected = entry.variations.find((v) => v.selected);
    span.textContent = selected ? selected.text : "";
    span.classList.remove("previewing");
  }

  async select(componentId: string, variationId: string): Promise<void> {
    if (!this.doc) return;
    this.state.hoverPreview = null;
    this.state.activeComponentId = componentId;
    try {
      await this.api.selectVariation(this.doc.id, componentId, variationId);
    } catch (error) {
      this.toast(`select failed: ${(error as Error).message}`);
      return;
    }
    await this.refresh();
  }

  async removeVariation(componentId: string, variationId: string): Promise<void> {
    if (!this.doc) return;
    try {
      await this.api.deleteVariation(this.doc.id, componentId, variationId);
    } catch (error) {
      this.toast(`delete failed: ${(error as Error).message}`);
      return;
    }
    await this.refresh();
  }

  async saveVariationText(componentId: string, variationId: string,
                          text: string): Promise<void> {
    if (!this.doc) return;
    try {
      await this.api.editVariation(this.doc.id, componentId, variationId, text);
    } catch (error) {
      this.toast(`edit failed: ${(error as Error).message}`);
      return;
    }
    await this.refresh();
  }

  async makeComponent(blockId: string, start: number, end: number): Promise<void> {
    if (!this.doc) return;
    try {
      const made = await this.api.createComponent(this.doc.id, blockId, start, end);
      this.state.activeComponentId = made.component_id;
    } catch (error) {
      this.toast(`make variations failed: ${(error as Error).message}`);
      return;
    }
    await this.refresh();
  }

  async adhoc(promptText: string): Promise<void> {
    const componentId = this.state.activeComponentId;
    if (!this.doc || !componentId) {
      this.toast("select a variation component first");
      return;
    }
    try {
      await this.api.adhocVariation(this.doc.id, componentId, promptText);
    } catch (error) {
      this.toast(`generation failed: ${(error as Error).message}`);
      return;
    }
    await this.refresh();
  }

  async applyButton(buttonId: string): Promise<void> {
    const componentId = this.state.activeComponentId;
    if (!this.doc || !componentId) {
      this.toast("select a variation component first");
      return;
    }
    try {
      await this.api.applyButton(this.doc.id, componentId, buttonId);
    } catch (error) {
      this.toast(`generation failed: ${(error as Error).message}`);
      return;
    }
    await this.refresh();
  }

  async saveButton(buttonId: string,
                   fields: { label?: string; prompt_text?: string }): Promise<void> {
    try {
      await this.api.editButton(buttonId, fields);
    } catch (error) {
      this.toast(`save failed: ${(error as Error).message}`);
      return;
    }
    await this.refresh();
  }

  async deleteButton(buttonId: string): Promise<void> {
    try {
      await this.api.deleteButton(buttonId);
    } catch (error) {
      this.toast(`delete failed: ${(error as Error).message}`);
      return;
    }
    await this.refresh();
  }

  visibleText(): string {
    return editorText(this.editorEl);
  }

  toast(message: string): void {
    this.toastEl.textContent = message;
    this.toastEl.hidden = false;
    setTimeout(() => {
      this.toastEl.hidden = true;
    }, 4000);
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

export async function initApp(root: HTMLElement, baseUrl: string): Promise<AbscribeApp> {
  const api = new ApiClient(baseUrl);
  const app = new AbscribeApp(root, api);
  const docs = await api.listDocuments();
  if (docs.length > 0) {
    await app.open(docs[0].id);
  } else {
    const made = await api.createDocument(
      "Welcome",
      "A draft to play with\nSelect any stretch of text and make variations of it.\n");
    await app.open(made.document.id);
  }
  return app;
}
