/** Global shortcuts: 1-5 pick a category, s skips, r reveals the image. */

const IGNORED_TAGS = new Set(["INPUT", "TEXTAREA", "SELECT"]);

export interface KeyHandlers {
  onCategory: (index: number) => void;
  onSkip: () => void;
  onReveal: () => void;
}

export function bindKeys(handlers: KeyHandlers): () => void {
  const onKeyDown = (event: KeyboardEvent) => {
    const target = event.target as HTMLElement | null;
    if (target && (IGNORED_TAGS.has(target.tagName) || target.isContentEditable)) {
      return;
    }
    if (event.key >= "1" && event.key <= "5") {
      event.preventDefault();
      handlers.onCategory(Number(event.key) - 1);
    } else if (event.key === "s" || event.key === "S") {
      event.preventDefault();
      handlers.onSkip();
    } else if (event.key === "r" || event.key === "R") {
      event.preventDefault();
      handlers.onReveal();
    }
  };
  window.addEventListener("keydown", onKeyDown);
  return () => window.removeEventListener("keydown", onKeyDown);
}
