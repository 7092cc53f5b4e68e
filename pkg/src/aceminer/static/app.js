import { RejectedDecisionError } from "./api.js";
import { ReviewQueue } from "./queue.js";
import { clearNetworkBanner, renderCard, renderNetworkBanner, renderPreview, renderProgress, showCardError, } from "./view.js";
/** Wires the queue model, the API client, and the DOM together.
 *
 * The browser holds no durable state: every load() rebuilds everything
 * from the server, so a page reload always reconstructs exactly the
 * server's view of the session.
 */
export class CurationApp {
    constructor(root, api) {
        this.root = root;
        this.api = api;
        this.queue = new ReviewQueue();
        this.keysBound = false;
        this.root.innerHTML = `
      <header class="top">
        <h1>Mapping curation</h1>
        <label class="curator-field">Curator
          <input id="curator" type="text" value="curator">
        </label>
        <div id="progress" class="progress"></div>
      </header>
      <div id="banner" class="banner" hidden></div>
      <main class="layout">
        <section id="queue" class="queue" aria-label="review queue"></section>
        <aside id="preview" class="preview"></aside>
      </main>
      <footer class="hints">
        <kbd>a</kbd> accept top candidate · <kbd>r</kbd> reject ·
        <kbd>j</kbd>/<kbd>k</kbd> next/previous card
      </footer>`;
        this.regions = {
            progress: this.root.querySelector("#progress"),
            preview: this.root.querySelector("#preview"),
            queue: this.root.querySelector("#queue"),
            banner: this.root.querySelector("#banner"),
            curator: this.root.querySelector("#curator"),
        };
    }
    /** Fetch rows, progress, and preview; rebuild the whole view. */
    async load() {
        try {
            const [rows, progress, preview] = await Promise.all([
                this.api.candidates("all"),
                this.api.progress(),
                this.api.preview(),
            ]);
            clearNetworkBanner(this.regions.banner);
            this.queue.load(rows);
            renderProgress(this.regions.progress, progress);
            renderPreview(this.regions.preview, preview);
            this.renderQueue();
            this.bindKeys();
        }
        catch (error) {
            if (error instanceof RejectedDecisionError) {
                throw error;
            }
            renderNetworkBanner(this.regions.banner, () => {
                void this.load();
            });
        }
    }
    renderQueue() {
        const container = this.regions.queue;
        container.innerHTML = "";
        if (this.queue.size === 0) {
            const done = document.createElement("p");
            done.className = "queue-empty";
            done.textContent = "Queue empty — every mapping is resolved.";
            container.appendChild(done);
            return;
        }
        const current = this.queue.current;
        for (const row of this.queue.pending) {
            container.appendChild(renderCard(row, row === current, {
                onAccept: (r, cui) => void this.decide(r, "accept", cui),
                onReject: (r) => void this.decide(r, "reject", null),
                onFocus: (r) => {
                    this.queue.focus(r.class_iri);
                    this.markCurrent();
                },
            }));
        }
    }
    markCurrent() {
        const current = this.queue.current;
        for (const card of this.regions.queue.querySelectorAll(".card")) {
            card.classList.toggle("current", current !== null && card.getAttribute("data-class-iri") === current.class_iri);
        }
    }
    cardOf(row) {
        return this.regions.queue.querySelector(`[data-class-iri="${CSS.escape(row.class_iri)}"]`);
    }
    async decide(row, verdict, cui) {
        const decision = {
            class_iri: row.class_iri,
            verdict,
            curator: this.regions.curator.value || "curator",
        };
        if (verdict === "accept") {
            decision.chosen_cui = cui ?? row.candidates[0]?.cui;
        }
        const card = this.cardOf(row);
        try {
            const progress = await this.api.submit(decision);
            // confirmed by the server: the card leaves the queue
            this.queue.remove(row.class_iri);
            renderProgress(this.regions.progress, progress);
            renderPreview(this.regions.preview, await this.api.preview());
            this.renderQueue();
        }
        catch (error) {
            if (error instanceof RejectedDecisionError) {
                // card keeps its queue position, reason shows inline
                if (card) {
                    showCardError(card, error.message);
                }
            }
            else {
                renderNetworkBanner(this.regions.banner, () => {
                    void this.load();
                });
            }
        }
    }
    bindKeys() {
        if (this.keysBound) {
            return;
        }
        this.keysBound = true;
        this.root.ownerDocument.addEventListener("keydown", (event) => {
            if (event.target?.tagName === "INPUT") {
                return;
            }
            const current = this.queue.current;
            switch (event.key) {
                case "a":
                    if (current && current.candidates.length > 0) {
                        void this.decide(current, "accept", current.candidates[0].cui);
                    }
                    break;
                case "r":
                    if (current) {
                        void this.decide(current, "reject", null);
                    }
                    break;
                case "j":
                    this.queue.next();
                    this.markCurrent();
                    break;
                case "k":
                    this.queue.previous();
                    this.markCurrent();
                    break;
            }
        });
    }
}
