// "@ai" streamed insert: renders tokens into a provisional span in real
// time, then offers accept / discard / revise. The document is only touched
// when accept resolves on the server.

import type { ApiClient, BlockInfo } from "./api.js";
import { injectAtOffset, restoreBlock } from "./editor.js";
import type { ViewState } from "./state.js";

export interface InsertFlowHooks {
  documentId(): string;
  blockById(blockId: string): BlockInfo | undefined;
  blockElement(blockId: string): HTMLElement | null;
  promptForRevision(): string | null;
  afterAccept(): Promise<void>;
  notify(message: string): void;
}

export class InsertFlow {
  private span: HTMLElement | null = null;
  private controls: HTMLElement | null = null;

  constructor(private api: ApiClient, private state: ViewState,
              private hooks: InsertFlowHooks) {}

  get activeInsertId(): string | null {
    return this.state.pendingInsert?.insertId ?? null;
  }

  async begin(blockId: string, offset: number, prompt: string): Promise<void> {
    if (this.state.pendingInsert && !this.state.pendingInsert.settled) {
      this.hooks.notify("an insert is already streaming");
      return;
    }
    const block = this.hooks.blockById(blockId);
    const paragraph = this.hooks.blockElement(blockId);
    if (!block || !paragraph) return;

    // drop the typed "@ai ..." text and mount the provisional span
    restoreBlock(paragraph, block, this.state);
    this.mountSpan(paragraph, offset);
    this.state.pendingInsert = {
      insertId: null, blockId, offset, prompt, text: "", settled: false,
    };
    await this.api.streamInsert(this.hooks.documentId(), blockId, offset, prompt, {
      onToken: (text) => this.appendToken(text),
      onDone: (insertId, fullText) => this.finish(insertId, fullText),
      onError: (reason) => this.fail(reason),
    });
  }

  private mountSpan(paragraph: HTMLElement, offset: number): void {
    this.span = document.createElement("span");
    this.span.className = "pending-insert";
    injectAtOffset(paragraph, offset, this.span);
  }

  private appendToken(text: string): void {
    const pending = this.state.pendingInsert;
    if (!pending || !this.span) return;
    pending.text += text;
    this.span.textContent = pending.text;
  }

  private finish(insertId: string, fullText: string): void {
    const pending = this.state.pendingInsert;
    if (!pending || !this.span) return;
    pending.insertId = insertId;
    pending.text = fullText;
    pending.settled = true;
    this.span.textContent = fullText;
    this.mountControls();
  }

  private fail(reason: string): void {
    this.hooks.notify(`insert failed: ${reason}`);
    this.teardown();
  }

  private mountControls(): void {
    if (!this.span) return;
    const controls = document.createElement("span");
    controls.className = "insert-controls";
    controls.setAttribute("contenteditable", "false");
    for (const [name, label] of
         [["accept", "Accept"], ["discard", "Discard"], ["revise", "Revise"]]) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = `insert-${name}`;
      button.textContent = label;
      button.addEventListener("click", () => {
        if (name === "accept") void this.accept();
        else if (name === "discard") void this.discard();
        else void this.revise();
      });
      controls.appendChild(button);
    }
    this.span.after(controls);
    this.controls = controls;
  }

  async accept(): Promise<void> {
    const pending = this.state.pendingInsert;
    if (!pending?.insertId) return;
    try {
      await this.api.resolveInsert(pending.insertId, "accept");
    } catch (error) {
      this.hooks.notify(`accept failed: ${(error as Error).message}`);
      return;
    }
    this.teardown();
    await this.hooks.afterAccept();
  }

  async discard(): Promise<void> {
    const pending = this.state.pendingInsert;
    if (!pending?.insertId) return;
    try {
      await this.api.resolveInsert(pending.insertId, "discard");
    } catch (error) {
      this.hooks.notify(`discard failed: ${(error as Error).message}`);
    }
    const block = this.hooks.blockById(pending.blockId);
    const paragraph = this.hooks.blockElement(pending.blockId);
    this.teardown();
    if (block && paragraph) restoreBlock(paragraph, block, this.state);
  }

  async revise(): Promise<void> {
    const pending = this.state.pendingInsert;
    if (!pending?.insertId) return;
    const newPrompt = this.hooks.promptForRevision();
    if (!newPrompt || !newPrompt.trim()) return;
    const previousId = pending.insertId;
    this.controls?.remove();
    this.controls = null;
    this.state.pendingInsert = {
      insertId: null, blockId: pending.blockId, offset: pending.offset,
      prompt: newPrompt, text: "", settled: false,
    };
    if (this.span) this.span.textContent = "";
    await this.api.reviseInsert(previousId, newPrompt, {
      onToken: (text) => this.appendToken(text),
      onDone: (insertId, fullText) => this.finish(insertId, fullText),
      onError: (reason) => this.fail(reason),
    });
  }

  private teardown(): void {
    this.span?.remove();
    this.controls?.remove();
    this.span = null;
    this.controls = null;
    this.state.pendingInsert = null;
  }
}
