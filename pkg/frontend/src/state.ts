// Session UI state and its transitions. Pure data-in/data-out so every
// rule (one in-flight request, no phantom turns, server-mirrored cards)
// is unit-testable without a DOM.

import type { ChatResponse, ProductCard, TimingRow } from "./types.js";

export interface TranscriptTurn {
  role: "user" | "agent";
  text: string;
  intent?: string;
}

export interface CardGroupView {
  title: string;
  note: string;
  cards: ProductCard[];
}

export interface UiSessionState {
  sessionId: string | null;
  turns: TranscriptTurn[];
  serverTurnCount: number; // turns the server has confirmed
  cardGroups: CardGroupView[];
  cart: string[];
  latency: TimingRow[];
  degradedBanner: boolean;
  inFlight: boolean;
  pendingMessage: string | null; // kept for the retry affordance
  transportError: string | null;
}

export function initialState(): UiSessionState {
  return {
    sessionId: null,
    turns: [],
    serverTurnCount: 0,
    cardGroups: [],
    cart: [],
    latency: [],
    degradedBanner: false,
    inFlight: false,
    pendingMessage: null,
    transportError: null,
  };
}

export function withSession(state: UiSessionState, sessionId: string): UiSessionState {
  return { ...state, sessionId };
}

/**
 * Gate a send: refused (returns null) when the input is empty or another
 * request is already in flight — one in-flight chat request per session.
 */
export function beginSend(state: UiSessionState, text: string): UiSessionState | null {
  const message = text.trim();
  if (!message || state.inFlight || state.sessionId === null) {
    return null;
  }
  return { ...state, inFlight: true, pendingMessage: message, transportError: null };
}

/** Group the response's products into card groups, preserving the
 * server's group order; cards never contain fields the payload lacks. */
export function groupCards(response: ChatResponse): CardGroupView[] {
  const byId = new Map(response.products.map((p) => [p.id, p]));
  const groups: CardGroupView[] = [];
  const placed = new Set<string>();
  for (const group of response.groups ?? []) {
    const cards = group.product_ids
      .map((id) => byId.get(id))
      .filter((p): p is ProductCard => p !== undefined);
    cards.forEach((card) => placed.add(card.id));
    groups.push({ title: group.title, note: group.note ?? "", cards });
  }
  const leftovers = response.products.filter((p) => !placed.has(p.id));
  if (leftovers.length > 0) {
    groups.push({ title: "Results", note: "", cards: leftovers });
  }
  return groups.filter((group) => group.cards.length > 0 || group.title !== "Results");
}

export function applyChatSuccess(
  state: UiSessionState,
  response: ChatResponse,
): UiSessionState {
  const message = state.pendingMessage ?? "";
  const turns: TranscriptTurn[] = [
    ...state.turns,
    { role: "user", text: message },
    { role: "agent", text: response.reply, intent: response.intent },
  ];
  return {
    ...state,
    turns,
    serverTurnCount: state.serverTurnCount + 2,
    cardGroups: response.products.length > 0 ? groupCards(response) : state.cardGroups,
    latency: response.timings,
    degradedBanner: response.degraded,
    inFlight: false,
    pendingMessage: null,
    transportError: null,
  };
}

/** Transport failure: no phantom turn enters the transcript; the message
 * stays pending so the UI can offer a retry. */
export function applyChatFailure(state: UiSessionState, reason: string): UiSessionState {
  return { ...state, inFlight: false, transportError: reason };
}

export function applyCart(state: UiSessionState, cart: string[]): UiSessionState {
  return { ...state, cart: [...cart] };
}
