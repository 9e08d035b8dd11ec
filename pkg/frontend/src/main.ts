/**
 * Session shell: ask for an annotator id once, then toggle between the
 * annotation view and the dashboard. No router, one page, two views.
 */

import { createAnnotateView } from "./annotate.js";
import { createDashboardView } from "./dashboard.js";

const POLL_MS = 4000;

function boot(annotator: string): void {
  const nav = document.querySelector("#nav") as HTMLElement;
  const navAnnotate = document.querySelector("#nav-annotate") as HTMLButtonElement;
  const navDashboard = document.querySelector("#nav-dashboard") as HTMLButtonElement;
  const who = document.querySelector("#who") as HTMLElement;
  const shell = document.querySelector("#shell") as HTMLElement;
  const annotateRoot = document.querySelector("#annotate") as HTMLElement;
  const dashboardRoot = document.querySelector("#dashboard") as HTMLElement;

  nav.classList.remove("hidden");
  shell.classList.remove("hidden");
  who.textContent = annotator;

  // both views stay mounted so the annotate session (personal count,
  // skipped items) survives a trip to the dashboard
  const annotate = createAnnotateView(annotateRoot, annotator);
  const dashboard = createDashboardView(dashboardRoot);

  function show(view: "annotate" | "dashboard"): void {
    const onDashboard = view === "dashboard";
    annotateRoot.classList.toggle("hidden", onDashboard);
    dashboardRoot.classList.toggle("hidden", !onDashboard);
    navAnnotate.classList.toggle("active", !onDashboard);
    navDashboard.classList.toggle("active", onDashboard);
    annotate.setActive(!onDashboard);
    if (onDashboard) {
      dashboard.start(POLL_MS);
    } else {
      dashboard.stop();
    }
  }

  navAnnotate.addEventListener("click", () => show("annotate"));
  navDashboard.addEventListener("click", () => show("dashboard"));
  show("annotate");
}

function init(): void {
  const gate = document.querySelector("#signin") as HTMLElement;
  const form = document.querySelector("#signin-form") as HTMLFormElement;
  const field = document.querySelector("#annotator-id") as HTMLInputElement;

  const saved = sessionStorage.getItem("annotator");
  if (saved) {
    gate.classList.add("hidden");
    boot(saved);
    return;
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const name = field.value.trim();
    if (!name) return;
    sessionStorage.setItem("annotator", name);
    gate.classList.add("hidden");
    boot(name);
  });
}

init();
