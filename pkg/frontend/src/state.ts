// Client view state. Server data is authoritative; this only tracks which
// component is active, what is being hover-previewed, the expanded
// accordion entries, and the in-flight insert, mirroring the UI contract
// that a hover preview must vanish without a trace.

export interface HoverPreview {
  componentId: string;
  variationId: string;
}

export interface PendingInsertView {
  insertId: string | null;
  blockId: string;
  offset: number;
  prompt: string;
  text: string;
  settled: boolean;
}

export class ViewState {
  activeComponentId: string | null = null;
  hoverPreview: HoverPreview | null = null;
  accordionExpanded = new Set<string>();
  pendingInsert: PendingInsertView | null = null;

  seeComponents(componentIds: string[]): void {
    // newly created components start expanded in the accordion
    const known = new Set(componentIds);
    for (const id of componentIds) {
      if (!this.sawBefore.has(id)) this.accordionExpanded.add(id);
      this.sawBefore.add(id);
    }
    for (const id of [...this.accordionExpanded]) {
      if (!known.has(id)) this.accordionExpanded.delete(id);
    }
    if (this.activeComponentId && !known.has(this.activeComponentId)) {
      this.activeComponentId = null;
    }
  }

  private sawBefore = new Set<string>();
}
