/**
 * Browser bootstrap: mount the controller into #app and translate DOM
 * events into controller calls via data-action delegation. The page is
 * served by the tracing service itself, so the API shares the origin.
 */

import { ApiClient } from "./api.js";
import { App } from "./app.js";

function mount(): void {
  const container = document.getElementById("app");
  if (!container) {
    throw new Error("missing #app container");
  }
  const app = new App(new ApiClient(""), (html) => {
    container.innerHTML = html;
  });

  container.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest("[data-action]");
    if (!(target instanceof HTMLElement)) return;
    const action = target.dataset.action;
    if (action === "choose-dataset" && target.dataset.dataset) {
      void app.chooseDataset(target.dataset.dataset);
    } else if (action === "open-session") {
      void app.openSession();
    } else if (action === "toggle-whatif" && target.dataset.attr) {
      app.toggleWhatIf(target.dataset.attr);
    } else if (action === "observe" && target.dataset.attr && target.dataset.value !== undefined) {
      void app.enterValue(target.dataset.attr, target.dataset.value);
    } else if (action === "rollback" && target.dataset.keep !== undefined) {
      void app.rollbackTo(Number(target.dataset.keep));
    } else if (action === "refresh") {
      void app.refresh();
    } else if (action === "end-session") {
      void app.endSession();
    } else if (action === "new-session") {
      app.newSession();
    } else if (action === "back-to-picker") {
      app.backToPicker();
    }
  });

  container.addEventListener("change", (event) => {
    const target = event.target as HTMLElement;
    if (target instanceof HTMLSelectElement && target.dataset.action === "set-known") {
      app.setKnown(target.dataset.attr ?? "", target.value);
    }
  });

  container.addEventListener("submit", (event) => {
    const form = event.target;
    if (!(form instanceof HTMLFormElement) || form.dataset.role !== "upload-form") return;
    event.preventDefault();
    const data = new FormData(form);
    void app.uploadDataset(String(data.get("name") ?? ""), String(data.get("csv") ?? ""));
  });

  void app.start();
}

mount();
