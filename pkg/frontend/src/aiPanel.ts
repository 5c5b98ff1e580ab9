// AI button panel: a prompt field whose submissions become labeled,
// reusable buttons, plus the button shelf itself. Labels and prompts are
// editable in a small popover.

import type { ButtonInfo } from "./api.js";

export interface AiPanelActions {
  submitPrompt(text: string): void;
  applyButton(buttonId: string): void;
  saveButton(buttonId: string, fields: { label?: string; prompt_text?: string }): void;
  deleteButton(buttonId: string): void;
}

export function renderAiPanel(container: HTMLElement, buttons: ButtonInfo[],
                              actions: AiPanelActions): void {
  container.textContent = "";

  const form = document.createElement("form");
  form.className = "ai-prompt-form";
  const input = document.createElement("input");
  input.type = "text";
  input.className = "ai-prompt-input";
  input.placeholder = "Instruct the AI, e.g. “make it shorter”";
  form.appendChild(input);
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.className = "ai-prompt-submit";
  submit.textContent = "Add variation";
  form.appendChild(submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text) return;
    input.value = "";
    actions.submitPrompt(text);
  });
  container.appendChild(form);

  const shelf = document.createElement("div");
  shelf.className = "ai-button-shelf";
  for (const button of buttons) {
    shelf.appendChild(renderButton(button, actions));
  }
  container.appendChild(shelf);
}

function renderButton(button: ButtonInfo, actions: AiPanelActions): HTMLElement {
  const wrap = document.createElement("div");
  wrap.className = "ai-button";
  wrap.dataset.buttonId = button.id;

  const apply = document.createElement("button");
  apply.type = "button";
  apply.className = "ai-button-apply";
  apply.textContent = button.label;
  apply.title = button.prompt_text;
  apply.addEventListener("click", () => actions.applyButton(button.id));
  wrap.appendChild(apply);

  const edit = document.createElement("button");
  edit.type = "button";
  edit.className = "ai-button-edit";
  edit.textContent = "✎";
  edit.addEventListener("click", () => togglePopover(wrap, button, actions));
  wrap.appendChild(edit);

  return wrap;
}

function togglePopover(wrap: HTMLElement, button: ButtonInfo,
                       actions: AiPanelActions): void {
  const existing = wrap.querySelector(".ai-button-popover");
  if (existing) {
    existing.remove();
    return;
  }
  const popover = document.createElement("form");
  popover.className = "ai-button-popover";

  const label = document.createElement("input");
  label.className = "popover-label";
  label.value = button.label;
  label.maxLength = 32;
  popover.appendChild(label);

  const prompt = document.createElement("input");
  prompt.className = "popover-prompt";
  prompt.value = button.prompt_text;
  popover.appendChild(prompt);

  const save = document.createElement("button");
  save.type = "submit";
  save.className = "popover-save";
  save.textContent = "Save";
  popover.appendChild(save);

  const remove = document.createElement("button");
  remove.type = "button";
  remove.className = "popover-delete";
  remove.textContent = "Delete";
  remove.addEventListener("click", () => actions.deleteButton(button.id));
  popover.appendChild(remove);

  popover.addEventListener("submit", (event) => {
    event.preventDefault();
    actions.saveButton(button.id, {
      label: label.value,
      prompt_text: prompt.value,
    });
  });
  wrap.appendChild(popover);
}
