/** Browser entry point: wires the controller to the DOM and the keyboard.
 *
 * The rendered view is a pure function of controller state, so a reload only
 * needs the session id (kept in sessionStorage) to reconstruct everything
 * from GET /state.
 */

import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import type { Actions } from "./view.js";
import { keyHandler, render } from "./view.js";
import type { Mode, Scenario, Verdict } from "./types.js";

const SESSION_KEY = "iws.session_id";

export function boot(root: HTMLElement, client: ApiClient, storage: Storage): Controller {
  const controller = new Controller(client);

  const actions: Actions = {
    start(mode: Mode, T: number): void {
      void controller.start({ mode, T }).then(() => {
        const s = controller.snapshot().session;
        if (s !== null) storage.setItem(SESSION_KEY, s.session_id);
      });
    },
    submit(verdict: Verdict): void {
      void controller.submitVerdict(verdict);
    },
    toggleSnippets(): void {
      controller.dispatch({ kind: "toggle_snippets" });
    },
    setConfident(confident: boolean): void {
      controller.dispatch({ kind: "set_confident", confident });
    },
    setScenario(scenario: Scenario): void {
      controller.dispatch({ kind: "set_scenario", scenario });
    },
    finalize(): void {
      void controller.finalize();
    },
    dismissBanner(): void {
      controller.dispatch({ kind: "dismiss_banner" });
    },
  };

  controller.subscribe((state) => render(root, state, actions));
  render(root, controller.snapshot(), actions);
  document.addEventListener("keydown", keyHandler(actions, () => controller.snapshot()));

  const existing = storage.getItem(SESSION_KEY);
  if (existing !== null) {
    void controller.restore(existing).catch(() => {
      storage.removeItem(SESSION_KEY);
      render(root, controller.snapshot(), actions);
    });
  }
  return controller;
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  const root = document.getElementById("app") as HTMLElement;
  boot(root, new ApiClient(""), window.sessionStorage);
}
