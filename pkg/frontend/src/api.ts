// Typed client for the abscribe HTTP service. The UI owns no document
// state; everything renders from what these calls return.

import { readSseBody } from "./sse.js";

export interface OriginInfo {
  kind: string;
  button_id?: string;
  source_variation_id?: string;
  prompt_text?: string;
}

export interface VariationInfo {
  id: string;
  text: string;
  selected: boolean;
  origin: OriginInfo;
  created_at: string;
}

export interface ComponentEntry {
  component_id: string;
  block_id: string;
  variations: VariationInfo[];
}

export interface EmbeddedVariation {
  id: string;
  text: string;
  origin: OriginInfo;
  created_at: string;
}

export type RunInfo =
  | { type: "text"; text: string }
  | {
      type: "component";
      component: { id: string; selected_id: string; variations: EmbeddedVariation[] };
    };

export interface BlockInfo {
  id: string;
  runs: RunInfo[];
}

export interface DocumentInfo {
  id: string;
  title: string;
  created_at: string;
  updated_at: string;
  blocks: BlockInfo[];
}

export interface DocumentSummary {
  id: string;
  title: string;
}

export interface ButtonInfo {
  id: string;
  label: string;
  prompt_text: string;
  created_at: string;
  use_count: number;
}

export interface InsertHandlers {
  onToken: (text: string) => void;
  onDone: (insertId: string, fullText: string) => void;
  onError: (reason: string) => void;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let code = "http_error";
    let message = response.statusText;
    try {
      const body = (await response.json()) as { code?: string; message?: string };
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, code, message);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}/api/v1${path}`;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.url(path), {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return unwrap<T>(response);
  }

  // --- documents ---

  listDocuments(): Promise<DocumentSummary[]> {
    return this.request("GET", "/documents");
  }

  createDocument(title: string, text?: string): Promise<{ document: DocumentInfo }> {
    return this.request("POST", "/documents", { title, text });
  }

  getDocument(documentId: string): Promise<DocumentInfo> {
    return this.request("GET", `/documents/${documentId}`);
  }

  async flatten(documentId: string): Promise<string> {
    const response = await fetch(this.url(`/documents/${documentId}/flatten`));
    if (!response.ok) throw new ApiError(response.status, "http_error", response.statusText);
    return response.text();
  }

  components(documentId: string): Promise<ComponentEntry[]> {
    return this.request("GET", `/documents/${documentId}/components`);
  }

  // --- components and variations ---

  createComponent(documentId: string, blockId: string, start: number, end: number):
      Promise<{ component_id: string; variation_id: string }> {
    return this.request("POST", `/documents/${documentId}/components`,
                        { block_id: blockId, start, end });
  }

  dissolveComponent(documentId: string, componentId: string): Promise<unknown> {
    return this.request("POST", `/documents/${documentId}/components/${componentId}/dissolve`);
  }

  addVariation(documentId: string, componentId: string, text: string):
      Promise<{ variation_id: string }> {
    return this.request("POST",
                        `/documents/${documentId}/components/${componentId}/variations`,
                        { text });
  }

  selectVariation(documentId: string, componentId: string, variationId: string):
      Promise<unknown> {
    return this.request(
      "PATCH",
      `/documents/${documentId}/components/${componentId}/variations/${variationId}`,
      { selected: true });
  }

  editVariation(documentId: string, componentId: string, variationId: string,
                text: string): Promise<unknown> {
    return this.request(
      "PATCH",
      `/documents/${documentId}/components/${componentId}/variations/${variationId}`,
      { text });
  }

  deleteVariation(documentId: string, componentId: string, variationId: string):
      Promise<unknown> {
    return this.request(
      "DELETE",
      `/documents/${documentId}/components/${componentId}/variations/${variationId}`);
  }

  cloneVariation(documentId: string, componentId: string, variationId: string):
      Promise<{ variation_id: string }> {
    return this.request(
      "POST",
      `/documents/${documentId}/components/${componentId}/variations/${variationId}/clone`);
  }

  // --- buttons ---

  buttons(): Promise<ButtonInfo[]> {
    return this.request("GET", "/buttons");
  }

  editButton(buttonId: string, fields: { prompt_text?: string; label?: string }):
      Promise<{ button: ButtonInfo }> {
    return this.request("PATCH", `/buttons/${buttonId}`, fields);
  }

  deleteButton(buttonId: string): Promise<unknown> {
    return this.request("DELETE", `/buttons/${buttonId}`);
  }

  applyButton(documentId: string, componentId: string, buttonId: string):
      Promise<{ variation_id: string; text: string }> {
    return this.request("POST",
                        `/documents/${documentId}/components/${componentId}/apply-button`,
                        { button_id: buttonId });
  }

  adhocVariation(documentId: string, componentId: string, promptText: string):
      Promise<{ button: ButtonInfo; variation_id: string; text: string }> {
    return this.request("POST",
                        `/documents/${documentId}/components/${componentId}/adhoc`,
                        { prompt_text: promptText });
  }

  // --- streamed inserts ---

  async streamInsert(documentId: string, blockId: string, offset: number,
                     promptText: string, handlers: InsertHandlers): Promise<void> {
    const response = await fetch(this.url(`/documents/${documentId}/inserts`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ block_id: blockId, offset, prompt_text: promptText }),
    });
    await this.consumeInsertStream(response, handlers);
  }

  async resolveInsert(insertId: string, action: "accept" | "discard"):
      Promise<unknown> {
    return this.request("POST", `/inserts/${insertId}/resolve`, { action });
  }

  async reviseInsert(insertId: string, newPrompt: string,
                     handlers: InsertHandlers): Promise<void> {
    const response = await fetch(this.url(`/inserts/${insertId}/resolve`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ action: "revise", new_prompt: newPrompt }),
    });
    await this.consumeInsertStream(response, handlers);
  }

  private async consumeInsertStream(response: Response,
                                    handlers: InsertHandlers): Promise<void> {
    if (!response.ok || !response.body) {
      const failure = await response.json().catch(() => ({}));
      handlers.onError((failure as { message?: string }).message ?? response.statusText);
      return;
    }
    await readSseBody(response.body, (event) => {
      if (event.event === "token") {
        handlers.onToken((event.data as { text: string }).text);
      } else if (event.event === "done") {
        const data = event.data as { insert_id: string; full_text: string };
        handlers.onDone(data.insert_id, data.full_text);
      } else if (event.event === "error") {
        handlers.onError((event.data as { reason: string }).reason);
      }
    });
  }
}
