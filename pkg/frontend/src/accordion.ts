// Sidebar accordion: every component in document order with its variations
// stacked underneath for side-by-side reading. Clicking a variation selects
// it and re-activates the component in the editor (which repositions the
// hover toolbar there).

import type { ComponentEntry } from "./api.js";
import { variationLetter } from "./letters.js";
import type { ViewState } from "./state.js";

export interface AccordionActions {
  activate(componentId: string): void;
  select(componentId: string, variationId: string): void;
  toggle(componentId: string): void;
}

function headerLabel(entry: ComponentEntry): string {
  const selected = entry.variations.find((v) => v.selected);
  const text = selected ? selected.text : "";
  return text.length > 36 ? `${text.slice(0, 36)}…` : text || "(empty)";
}

export function renderAccordion(container: HTMLElement,
                                components: ComponentEntry[],
                                state: ViewState,
                                actions: AccordionActions): void {
  container.textContent = "";
  for (const entry of components) {
    const section = document.createElement("section");
    section.className = "accordion-entry";
    section.dataset.componentId = entry.component_id;
    if (state.activeComponentId === entry.component_id) {
      section.classList.add("active");
    }

    const header = document.createElement("button");
    header.type = "button";
    header.className = "accordion-header";
    header.textContent = headerLabel(entry);
    header.addEventListener("click", () => {
      actions.toggle(entry.component_id);
      actions.activate(entry.component_id);
    });
    section.appendChild(header);

    const list = document.createElement("ul");
    list.className = "accordion-variations";
    list.hidden = !state.accordionExpanded.has(entry.component_id);
    entry.variations.forEach((variation, index) => {
      const item = document.createElement("li");
      item.className = "accordion-variation";
      item.dataset.variationId = variation.id;
      if (variation.selected) item.classList.add("selected");

      const letter = document.createElement("span");
      letter.className = "accordion-letter";
      letter.textContent = variationLetter(index);
      item.appendChild(letter);

      const text = document.createElement("span");
      text.className = "accordion-text";
      text.textContent = variation.text;
      item.appendChild(text);

      item.addEventListener("click", () => {
        actions.select(entry.component_id, variation.id);
      });
      list.appendChild(item);
    });
    section.appendChild(list);
    container.appendChild(section);
  }
}
