/**
 * DOM renderer for the adjudication queue and agreement dashboard.
 *
 * Keyboard-first: 1 = correct, 2 = over-masked, 3 = under-masked;
 * Enter submits with the note field content.  Only masked text is ever
 * rendered.
 */

import { ReviewController } from "./controller.js";
import { segmentMaskedText } from "./highlight.js";
import type { AgreementResponse, DisagreementEntry, Judgment } from "./types.js";
import { JUDGMENTS } from "./types.js";

const KEY_TO_JUDGMENT: Record<string, Judgment> = {
  "1": "correct",
  "2": "over-masked",
  "3": "under-masked",
};

function el(tag: string, className: string, text = ""): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function renderMaskedText(text: string): HTMLElement {
  const container = el("div", "masked-text");
  for (const segment of segmentMaskedText(text)) {
    if (segment.kind === "text") {
      container.appendChild(document.createTextNode(segment.text));
    } else {
      const cls = segment.kind === "mask" ? "mask-token" : "digit-residue";
      container.appendChild(el("span", cls, segment.text));
    }
  }
  return container;
}

export class QueueView {
  private selected: Judgment = "correct";

  constructor(
    private readonly root: HTMLElement,
    private readonly controller: ReviewController,
  ) {
    root.addEventListener("keydown", (event) => this.onKey(event as KeyboardEvent));
  }

  async start(): Promise<void> {
    await this.controller.loadNext();
    this.render();
  }

  private async onKey(event: KeyboardEvent): Promise<void> {
    const judgment = KEY_TO_JUDGMENT[event.key];
    if (judgment) {
      this.selected = judgment;
      this.render();
      return;
    }
    if (event.key === "Enter") {
      const note = (this.root.querySelector(".note-input") as HTMLInputElement | null)?.value ?? "";
      await this.controller.submit(this.selected, note);
      this.selected = "correct";
      this.render();
    }
  }

  render(): void {
    this.root.replaceChildren();
    const state = this.controller.state;
    if (state.phase === "card") {
      const { card } = state;
      const header = el("div", "card-header");
      header.appendChild(el("span", "record-id", card.record_id));
      header.appendChild(el("span", "label", card.label));
      header.appendChild(
        el("span", "progress", `${card.progress.judged}/${card.progress.assigned}`),
      );
      this.root.appendChild(header);
      this.root.appendChild(renderMaskedText(card.masked_text));
      const controls = el("div", "controls");
      for (const judgment of JUDGMENTS) {
        const button = el("button", judgment === this.selected ? "judgment active" : "judgment");
        button.textContent = judgment;
        button.addEventListener("click", () => {
          this.selected = judgment;
          this.render();
        });
        controls.appendChild(button);
      }
      const note = document.createElement("input");
      note.className = "note-input";
      note.placeholder = "nota (opcional)";
      controls.appendChild(note);
      this.root.appendChild(controls);
    } else if (state.phase === "done") {
      const done = el("div", "done");
      done.appendChild(
        el("p", "", `Revisión completa: ${state.progress.judged}/${state.progress.assigned}`),
      );
      const link = el("a", "agreement-link", "ver acuerdo entre revisores");
      link.setAttribute("href", "#agreement");
      done.appendChild(link);
      this.root.appendChild(done);
    } else if (state.phase === "error") {
      this.root.appendChild(el("p", "error", state.message));
    }
  }
}

export function renderAgreement(
  root: HTMLElement,
  agreement: AgreementResponse,
  disagreements: DisagreementEntry[],
): void {
  root.replaceChildren();
  if (agreement.status === "incomplete") {
    root.appendChild(
      el(
        "p",
        "incomplete",
        `Conjunto compartido incompleto: ${agreement.shared_judged}/${agreement.shared_total}`,
      ),
    );
    return;
  }
  const summary = el("div", "agreement-summary");
  summary.appendChild(el("span", "raw", agreement.raw_agreement.toFixed(4)));
  summary.appendChild(el("span", "kappa", agreement.kappa.toFixed(4)));
  root.appendChild(summary);
  const list = el("ul", "disagreements");
  for (const entry of disagreements) {
    const item = el("li", "disagreement");
    item.appendChild(el("span", "record-id", entry.record_id));
    for (const [reviewer, verdict] of Object.entries(entry.verdicts)) {
      item.appendChild(el("span", "verdict", `${reviewer}: ${verdict.judgment}`));
      if (verdict.note) item.appendChild(el("span", "note", verdict.note));
    }
    list.appendChild(item);
  }
  root.appendChild(list);
}
