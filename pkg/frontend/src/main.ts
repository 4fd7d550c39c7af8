// Browser entry point: token gate, hash router, page composition.

import { ApiClient } from "./api.js";
import {
  Ctx,
  databagList,
  playground,
  runMonitor,
  solutionList,
  trainWizard,
  uploadWizard,
} from "./views.js";

let activeMonitorStop: (() => void) | null = null;

function tokenGate(doc: Document, onToken: (token: string) => void): HTMLElement {
  const input = doc.createElement("input");
  input.type = "password";
  input.placeholder = "API token";
  const button = doc.createElement("button");
  button.className = "primary";
  button.textContent = "Connect";
  button.addEventListener("click", () => {
    if (input.value) onToken(input.value);
  });
  const section = doc.createElement("section");
  section.className = "card token-gate";
  const heading = doc.createElement("h2");
  heading.textContent = "Connect to your platform";
  const hint = doc.createElement("p");
  hint.textContent = "Paste the API token shown when the server started. It is kept in memory only.";
  section.append(heading, hint, input, button);
  return section;
}

async function renderRoute(ctx: Ctx, root: HTMLElement, hash: string): Promise<void> {
  if (activeMonitorStop) {
    activeMonitorStop();
    activeMonitorStop = null;
  }
  root.replaceChildren();
  const { api } = ctx;

  const solutionMatch = hash.match(/^#\/solutions\/([^/]+)(\/predict)?$/);
  const databagMatch = hash.match(/^#\/databags\/([^/]+)$/);

  if (databagMatch) {
    const bag = await api.getDatabag(databagMatch[1]);
    const wizard = trainWizard(ctx, bag, (solution) =>
      ctx.navigate(`#/solutions/${solution.id}`),
    );
    root.append(wizard.element);
    return;
  }

  if (solutionMatch && solutionMatch[2]) {
    const solution = await api.getSolution(solutionMatch[1]);
    const bag = await api.getDatabag(solution.databag_id);
    root.append(playground(ctx, solution, bag).element);
    return;
  }

  if (solutionMatch) {
    const monitor = runMonitor(ctx, solutionMatch[1]);
    activeMonitorStop = monitor.stop;
    root.append(monitor.element);
    return;
  }

  // landing page: upload wizard + datasets + models
  const wizard = uploadWizard(ctx, (bag) => ctx.navigate(`#/databags/${bag.id}`));
  root.append(wizard.element);
  const [bags, solutions] = await Promise.all([api.listDatabags(), api.listSolutions()]);
  root.append(databagList(ctx, bags), solutionList(ctx, solutions));
}

export function mountApp(win: Window, baseUrl = ""): void {
  const doc = win.document;
  const root = doc.getElementById("app")!;

  const start = (token: string) => {
    const api = new ApiClient(baseUrl, token);
    const ctx: Ctx = {
      doc,
      api,
      navigate: (hash) => {
        win.location.hash = hash;
      },
    };
    const rerender = () => {
      renderRoute(ctx, root, win.location.hash).catch((err) => {
        root.replaceChildren();
        const box = doc.createElement("div");
        box.className = "error-box";
        box.textContent = String(err);
        root.append(box);
      });
    };
    win.addEventListener("hashchange", rerender);
    rerender();
  };

  root.replaceChildren(tokenGate(doc, start));
}

declare global {
  interface Window {
    os4mlMount?: typeof mountApp;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.os4mlMount = mountApp;
  if (document.getElementById("app")) {
    mountApp(window);
  }
}
