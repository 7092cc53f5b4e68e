import { percentResolved } from "./queue.js";
function el(tag, className, text) {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}
export function renderProgress(container, progress) {
    container.innerHTML = "";
    const percent = percentResolved(progress);
    const bar = el("div", "progress-track");
    const fill = el("div", "progress-fill");
    fill.style.width = `${percent}%`;
    bar.appendChild(fill);
    container.appendChild(bar);
    container.appendChild(el("span", "progress-text", `${progress.accepted} accepted · ${progress.rejected} rejected · ` +
        `${progress.unresolved} pending (${percent}%)`));
    container.setAttribute("data-resolved", String(progress.accepted + progress.rejected));
}
export function renderPreview(container, preview) {
    container.innerHTML = "";
    container.appendChild(el("h2", undefined, "Terminology preview"));
    container.appendChild(el("p", "preview-size", `${preview.entries.length} concepts if built now`));
    const list = el("ul", "preview-list");
    for (const entry of preview.entries.slice(0, 12)) {
        list.appendChild(el("li", undefined, `${entry.cui} — ${entry.preferred_label}`));
    }
    if (preview.entries.length > 12) {
        list.appendChild(el("li", "preview-more", `… ${preview.entries.length - 12} more`));
    }
    container.appendChild(list);
    container.setAttribute("data-count", String(preview.entries.length));
}
function candidateRow(candidate, name, checked) {
    const row = el("label", "candidate");
    const radio = el("input");
    radio.type = "radio";
    radio.name = name;
    radio.value = candidate.cui;
    radio.checked = checked;
    row.appendChild(radio);
    row.appendChild(el("span", "candidate-cui", candidate.cui));
    row.appendChild(el("span", "candidate-label", candidate.preferred_label));
    row.appendChild(el("span", `candidate-kind kind-${candidate.match_kind}`, candidate.match_kind));
    row.appendChild(el("span", "candidate-score", candidate.score.toFixed(2)));
    return row;
}
/** One review card. Candidates render in API order — ranking is the
 * server's job. */
export function renderCard(row, isCurrent, handlers) {
    const card = el("article", `card${isCurrent ? " current" : ""}`);
    card.setAttribute("data-class-iri", row.class_iri);
    card.tabIndex = 0;
    card.addEventListener("focus", () => handlers.onFocus(row));
    card.addEventListener("click", () => handlers.onFocus(row));
    const head = el("header", "card-head");
    head.appendChild(el("h3", "card-label", row.label));
    if (row.ambiguous) {
        head.appendChild(el("span", "badge badge-ambiguous", "ambiguous"));
    }
    if (row.candidates.length === 0) {
        head.appendChild(el("span", "badge badge-unmapped", "no candidates"));
    }
    card.appendChild(head);
    if (row.context.length > 0) {
        card.appendChild(el("p", "card-context", row.context.join(" › ")));
    }
    const radioName = `cand-${row.class_iri}`;
    const list = el("div", "candidates");
    row.candidates.forEach((candidate, i) => {
        list.appendChild(candidateRow(candidate, radioName, i === 0));
    });
    card.appendChild(list);
    const error = el("p", "card-error");
    error.hidden = true;
    card.appendChild(error);
    const actions = el("div", "card-actions");
    const accept = el("button", "btn-accept", "Accept");
    accept.disabled = row.candidates.length === 0;
    accept.addEventListener("click", (event) => {
        event.stopPropagation();
        const chosen = card.querySelector(`input[name="${radioName}"]:checked`);
        handlers.onAccept(row, chosen ? chosen.value : null);
    });
    const reject = el("button", "btn-reject", "Reject");
    reject.addEventListener("click", (event) => {
        event.stopPropagation();
        handlers.onReject(row);
    });
    actions.appendChild(accept);
    actions.appendChild(reject);
    card.appendChild(actions);
    return card;
}
export function showCardError(card, message) {
    const error = card.querySelector(".card-error");
    if (error) {
        error.textContent = message;
        error.hidden = false;
    }
}
export function renderNetworkBanner(container, onRetry) {
    container.innerHTML = "";
    const banner = el("div", "network-banner");
    banner.appendChild(el("span", undefined, "Cannot reach the curation service."));
    const retry = el("button", "btn-retry", "Retry");
    retry.addEventListener("click", onRetry);
    banner.appendChild(retry);
    container.appendChild(banner);
    container.hidden = false;
}
export function clearNetworkBanner(container) {
    container.innerHTML = "";
    container.hidden = true;
}
