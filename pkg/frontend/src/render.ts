// HTML renderers. Pure string builders over state: the no-fabrication
// audit walks their output, so every dynamic value must come from a
// server payload field.

import type { TimingRow } from "./types.js";
import type { CardGroupView, TranscriptTurn, UiSessionState } from "./state.js";

export const SUB_2S_TARGET_MS = 2000;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTranscript(turns: TranscriptTurn[]): string {
  const rows = turns.map((turn) =>
    `<div class="turn turn-${turn.role}"><span class="who">${turn.role}</span>` +
    `<span class="text">${escapeHtml(turn.text)}</span></div>`);
  return `<div class="transcript">${rows.join("")}</div>`;
}

export function renderCardGroups(groups: CardGroupView[]): string {
  const sections = groups.map((group) => {
    const cards = group.cards.map((card) =>
      `<div class="card" data-id="${escapeHtml(card.id)}">` +
      `<div class="card-title">${escapeHtml(card.title)}</div>` +
      `<div class="card-price">${card.price.toFixed(2)} ${escapeHtml(card.currency)}</div>` +
      `<div class="card-score">score ${card.score.toFixed(3)}</div>` +
      (card.explanation
        ? `<div class="card-why">${escapeHtml(card.explanation)}</div>` : "") +
      `<button class="add-to-cart" data-id="${escapeHtml(card.id)}">Add to cart</button>` +
      `</div>`);
    return `<section class="card-group">` +
      `<h3>${escapeHtml(group.title)}</h3>` +
      (group.note ? `<p class="group-note">${escapeHtml(group.note)}</p>` : "") +
      `<div class="cards">${cards.join("")}</div></section>`;
  });
  return `<div class="card-groups">${sections.join("")}</div>`;
}

export function latencyIndicator(e2eMs: number): "green" | "amber" {
  return e2eMs < SUB_2S_TARGET_MS ? "green" : "amber";
}

/** Rows per stage with the end-to-end row highlighted and colored by the
 * sub-2-second target; hidden entirely (empty string) with no timings. */
export function renderLatencyPanel(timings: TimingRow[]): string {
  if (timings.length === 0) {
    return "";
  }
  const rows = timings.map((timing) => {
    const highlight = timing.stage === "e2e"
      ? ` e2e ${latencyIndicator(timing.ms)}` : "";
    return `<tr class="latency-row${highlight}">` +
      `<td>${escapeHtml(timing.stage)}</td>` +
      `<td>${timing.ms.toFixed(1)} ms</td></tr>`;
  });
  return `<table class="latency-panel"><tbody>${rows.join("")}</tbody></table>`;
}

export function renderCartBadge(cart: string[]): string {
  return `<span class="cart-badge">Cart (${cart.length})</span>`;
}

export function renderDegradedBanner(visible: boolean): string {
  return visible
    ? `<div class="degraded-banner">Degraded mode: some features fell back.</div>`
    : "";
}

export function renderErrorBar(state: UiSessionState): string {
  if (!state.transportError) {
    return "";
  }
  return `<div class="error-bar">` +
    `<span>${escapeHtml(state.transportError)}</span>` +
    `<button class="retry">Retry</button></div>`;
}

export function renderApp(state: UiSessionState): string {
  return [
    renderDegradedBanner(state.degradedBanner),
    renderErrorBar(state),
    renderTranscript(state.turns),
    renderCardGroups(state.cardGroups),
    renderLatencyPanel(state.latency),
    renderCartBadge(state.cart),
  ].join("\n");
}
