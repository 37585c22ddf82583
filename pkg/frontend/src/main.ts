/** Entry point: wires the controller to the page served by serve-review. */

import { ReviewApi } from "./api.js";
import { ReviewController } from "./controller.js";
import { QueueView, renderAgreement } from "./dom.js";

function reviewerFromQuery(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("reviewer") ?? "reviewer-a";
}

async function boot(): Promise<void> {
  const api = new ReviewApi("");
  const controller = new ReviewController(api, reviewerFromQuery());
  const queueRoot = document.getElementById("queue");
  const agreementRoot = document.getElementById("agreement");
  if (queueRoot === null || agreementRoot === null) {
    throw new Error("missing #queue or #agreement containers");
  }
  queueRoot.tabIndex = 0;
  const view = new QueueView(queueRoot, controller);
  await view.start();
  queueRoot.focus();

  const refreshAgreement = async () => {
    const agreement = await controller.agreement();
    const disagreements =
      agreement.status === "complete" ? await controller.disagreements() : [];
    renderAgreement(agreementRoot, agreement, disagreements);
  };
  await refreshAgreement();
  window.addEventListener("hashchange", () => {
    if (window.location.hash === "#agreement") void refreshAgreement();
  });
}

void boot();
