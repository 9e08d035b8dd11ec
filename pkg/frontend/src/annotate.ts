/**
 * Annotation view: fetch the next queued image, pick one of the five
 * categories (keys 1-5 or buttons), auto-advance. Labels go straight to
 * the server; this file never aggregates them.
 *
 * The skip control is session-local: the server has no notion of a skip,
 * so deferred items are parked in memory and resurface once the server
 * stops offering anything new.
 */

import {
  ApiError,
  CATEGORIES,
  fetchNextItem,
  imageUrl,
  submitLabel,
  type QueueItem,
} from "./api.js";
import { bindKeys } from "./keyboard.js";

export interface AnnotateView {
  /** Everything in-flight has settled; for tests and view switching. */
  idle(): Promise<void>;
  /** While inactive the view ignores keys and clicks (dashboard is up). */
  setActive(active: boolean): void;
  destroy(): void;
}

export function createAnnotateView(root: HTMLElement, annotator: string): AnnotateView {
  root.innerHTML = `
    <div class="banner hidden">
      <span class="banner-text"></span>
      <button class="retry" type="button">Retry</button>
    </div>
    <p class="notice hidden"></p>
    <section class="warning">
      <h2>Content warning</h2>
      <p>
        The queued images were flagged for review because they may show
        people in sexualized, explicit, or non-consensual contexts.
        Images stay blurred until you choose to reveal them. Work at your
        own pace and take breaks when you need them.
      </p>
      <button class="accept" type="button">I understand, begin</button>
    </section>
    <section class="item hidden">
      <figure class="frame">
        <img class="subject blurred" alt="queued image, blurred until revealed" />
        <button class="reveal" type="button">Reveal (r)</button>
      </figure>
      <p class="deferred-tag hidden">previously skipped</p>
      <dl class="meta">
        <dt>class</dt><dd class="meta-label"></dd>
        <dt>synset</dt><dd class="meta-synset"></dd>
        <dt>image</dt><dd class="meta-file"></dd>
        <dt>class mean NSFW</dt><dd class="meta-nsfw"></dd>
      </dl>
      <div class="choices"></div>
      <p class="session-count">0 labeled this session</p>
    </section>
    <section class="complete hidden">
      <h2>Queue complete</h2>
      <p class="final-count"></p>
    </section>
  `;

  const el = {
    banner: root.querySelector(".banner") as HTMLElement,
    bannerText: root.querySelector(".banner-text") as HTMLElement,
    retry: root.querySelector(".retry") as HTMLButtonElement,
    notice: root.querySelector(".notice") as HTMLElement,
    warning: root.querySelector(".warning") as HTMLElement,
    accept: root.querySelector(".accept") as HTMLButtonElement,
    item: root.querySelector(".item") as HTMLElement,
    image: root.querySelector(".subject") as HTMLImageElement,
    reveal: root.querySelector(".reveal") as HTMLButtonElement,
    deferredTag: root.querySelector(".deferred-tag") as HTMLElement,
    metaLabel: root.querySelector(".meta-label") as HTMLElement,
    metaSynset: root.querySelector(".meta-synset") as HTMLElement,
    metaFile: root.querySelector(".meta-file") as HTMLElement,
    metaNsfw: root.querySelector(".meta-nsfw") as HTMLElement,
    choices: root.querySelector(".choices") as HTMLElement,
    sessionCount: root.querySelector(".session-count") as HTMLElement,
    complete: root.querySelector(".complete") as HTMLElement,
    finalCount: root.querySelector(".final-count") as HTMLElement,
  };

  CATEGORIES.forEach((category, i) => {
    const button = document.createElement("button");
    button.type = "button";
    button.className = "choice";
    button.dataset.category = category;
    button.textContent = `${i + 1} ${category.replace(/_/g, " ")}`;
    button.addEventListener("click", () => void submitCategory(i));
    el.choices.appendChild(button);
  });
  const skipButton = document.createElement("button");
  skipButton.type = "button";
  skipButton.className = "skip";
  skipButton.textContent = "Skip (s)";
  skipButton.addEventListener("click", () => void skip());
  el.choices.appendChild(skipButton);

  let current: QueueItem | null = null;
  let personalCount = 0;
  const deferred: QueueItem[] = [];
  const deferredIds = new Set<string>();
  let active = true;
  let busy = false;
  let lastOp: Promise<void> = Promise.resolve();
  // set while a failed call waits for the user to hit Retry
  let retryOp: (() => Promise<void>) | null = null;

  function setNotice(text: string | null): void {
    el.notice.textContent = text ?? "";
    el.notice.classList.toggle("hidden", text === null);
  }

  function setBanner(text: string | null): void {
    el.bannerText.textContent = text ?? "";
    el.banner.classList.toggle("hidden", text === null);
  }

  function showItem(item: QueueItem, wasDeferred: boolean): void {
    current = item;
    el.warning.classList.add("hidden");
    el.complete.classList.add("hidden");
    el.item.classList.remove("hidden");
    el.image.classList.add("blurred");
    el.reveal.classList.remove("hidden");
    el.image.src = imageUrl(item.item_id);
    el.deferredTag.classList.toggle("hidden", !wasDeferred);
    el.metaLabel.textContent = item.class_label || item.wordnet_id;
    el.metaSynset.textContent = item.wordnet_id;
    el.metaFile.textContent = `${item.split}/${item.file_name}`;
    el.metaNsfw.textContent = item.mean_nsfw_train.toFixed(3);
  }

  function showComplete(): void {
    current = null;
    el.warning.classList.add("hidden");
    el.item.classList.add("hidden");
    el.complete.classList.remove("hidden");
    el.finalCount.textContent =
      `You labeled ${personalCount} image${personalCount === 1 ? "" : "s"} this session.`;
  }

  function updateCount(): void {
    el.sessionCount.textContent = `${personalCount} labeled this session`;
  }

  // one operation at a time; extra key presses while busy are dropped so a
  // label can never be sent twice or out of order
  function run(op: () => Promise<void>): Promise<void> {
    if (!active || busy || retryOp !== null) return lastOp;
    busy = true;
    lastOp = op().finally(() => {
      busy = false;
    });
    return lastOp;
  }

  // network errors park the exact operation behind the Retry button; the
  // ones the server answered are handled by their callers
  async function attempt(op: () => Promise<void>): Promise<void> {
    try {
      await op();
    } catch (err) {
      if (err instanceof ApiError) throw err;
      retryOp = op;
      setBanner("Connection problem. Nothing was recorded; retry when ready.");
    }
  }

  async function advance(): Promise<void> {
    await attempt(async () => {
      const item = await fetchNextItem(annotator);
      setBanner(null);
      if (item !== null && !deferredIds.has(item.item_id)) {
        showItem(item, false);
        return;
      }
      // nothing new from the server: fall back to the oldest skipped item
      const parked = deferred.shift();
      if (parked !== undefined) {
        deferredIds.delete(parked.item_id);
        showItem(parked, true);
        return;
      }
      showComplete();
    });
  }

  async function submitCategory(index: number): Promise<void> {
    const category = CATEGORIES[index];
    if (category === undefined) return;
    return run(async () => {
      if (current === null) return;
      const item = current;
      setNotice(null);
      await attempt(async () => {
        try {
          await submitLabel(annotator, item.item_id, category);
          personalCount += 1;
          updateCount();
        } catch (err) {
          if (err instanceof ApiError && err.status === 409) {
            setNotice("That item was just closed by the other annotators; moving on.");
          } else if (err instanceof ApiError) {
            setNotice(`The server refused the label: ${err.message}`);
          } else {
            throw err; // network failure -> retry banner keeps this submission
          }
        }
        setBanner(null);
        await advance();
      });
    });
  }

  function skip(): Promise<void> {
    return run(async () => {
      if (current === null) return;
      setNotice(null);
      deferred.push(current);
      deferredIds.add(current.item_id);
      current = null;
      await advance();
    });
  }

  function reveal(): void {
    if (!active) return;
    el.image.classList.remove("blurred");
    el.reveal.classList.add("hidden");
  }

  el.accept.addEventListener("click", () => void run(advance));
  el.retry.addEventListener("click", () => {
    const op = retryOp;
    if (op === null || !active) return;
    retryOp = null;
    setBanner(null);
    void run(() => attempt(op));
  });
  el.image.addEventListener("click", reveal);
  el.reveal.addEventListener("click", reveal);

  const unbindKeys = bindKeys({
    onCategory: (index) => void submitCategory(index),
    onSkip: () => void skip(),
    onReveal: reveal,
  });

  return {
    idle: () => lastOp,
    setActive: (flag) => {
      active = flag;
    },
    destroy: () => {
      unbindKeys();
      root.innerHTML = "";
    },
  };
}
