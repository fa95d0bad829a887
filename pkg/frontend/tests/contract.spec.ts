// Contract tests against recorded agent-service payloads: the fixture
// server replays byte-for-byte what the real API returned.

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { ApiRequestError } from "../src/api.js";
import { FixtureAgentApi, type FixtureSet } from "../src/fixtureServer.js";
import {
  renderApp,
  renderCardGroups,
  renderLatencyPanel,
} from "../src/render.js";
import {
  applyCart,
  applyChatFailure,
  applyChatSuccess,
  beginSend,
  initialState,
  withSession,
  type UiSessionState,
} from "../src/state.js";
import type { ChatResponse } from "../src/types.js";

const fixture = (name: string) =>
  JSON.parse(readFileSync(
    fileURLToPath(new URL(`../fixtures/${name}`, import.meta.url)), "utf-8"));

const fixtures: FixtureSet = {
  session: fixture("session.json"),
  chatByKeyword: {
    skiing: fixture("chat_skiing.json"),
    "hi!": fixture("chat_smalltalk.json"),
  },
  chatDefault: fixture("chat_skiing.json"),
  cart: fixture("cart.json"),
  product: fixture("product.json"),
  error: fixture("error.json"),
};

const SKIING_PROMPT = "Suggest tech accessories for skiing";

async function establishedSession(api: FixtureAgentApi): Promise<UiSessionState> {
  const session = await api.createSession();
  return withSession(initialState(), session.session_id);
}

async function sendThrough(
  api: FixtureAgentApi,
  state: UiSessionState,
  message: string,
): Promise<UiSessionState> {
  const inFlight = beginSend(state, message);
  expect(inFlight).not.toBeNull();
  try {
    const response = await api.chat(inFlight!.sessionId!, message);
    return applyChatSuccess(inFlight!, response);
  } catch (error) {
    const reason = error instanceof ApiRequestError
      ? `${error.code}: ${error.message}` : "network error";
    return applyChatFailure(inFlight!, reason);
  }
}

describe("skiing golden flow", () => {
  it("renders four product-card groups from the recorded payload", async () => {
    const api = new FixtureAgentApi(fixtures);
    let state = await establishedSession(api);
    state = await sendThrough(api, state, SKIING_PROMPT);

    expect(state.cardGroups.map((g) => g.title)).toEqual([
      "Heated Tech Gloves", "Power Banks", "Action Cameras", "Phone Cases",
    ]);
    for (const group of state.cardGroups) {
      expect(group.cards.length).toBeGreaterThan(0);
    }
    const html = renderCardGroups(state.cardGroups);
    expect(html.match(/<section class="card-group">/g)).toHaveLength(4);
  });
});

describe("no-fabrication audit", () => {
  const decode = (segment: string) => segment
    .replace(/&lt;/g, "<").replace(/&gt;/g, ">")
    .replace(/&quot;/g, '"').replace(/&amp;/g, "&");

  const textSegments = (html: string) => html
    .split(/<[^>]+>/)
    .map((segment) => segment.trim())
    .filter((segment) => segment.length > 0)
    .map(decode);

  it("every rendered text segment traces to a payload field", async () => {
    const api = new FixtureAgentApi(fixtures);
    let state = await establishedSession(api);
    state = await sendThrough(api, state, SKIING_PROMPT);
    state = applyCart(state, (await api.addToCart(state.sessionId!, "P0141")).cart);

    const payload: ChatResponse = fixtures.chatDefault;
    const allowed = new Set<string>([
      // static chrome
      "user", "agent", "Add to cart",
      // user-typed input
      SKIING_PROMPT,
      // cart badge reflects server cart length
      `Cart (${state.cart.length})`,
    ]);
    allowed.add(payload.reply);
    for (const product of payload.products) {
      allowed.add(product.title);
      allowed.add(`${product.price.toFixed(2)} ${product.currency}`);
      allowed.add(`score ${product.score.toFixed(3)}`);
      if (product.explanation) {
        allowed.add(product.explanation);
      }
    }
    for (const group of payload.groups ?? []) {
      allowed.add(group.title);
      if (group.note) {
        allowed.add(group.note);
      }
    }
    for (const timing of payload.timings) {
      allowed.add(timing.stage);
      allowed.add(`${timing.ms.toFixed(1)} ms`);
    }

    const segments = textSegments(renderApp(state));
    expect(segments.length).toBeGreaterThan(20);
    for (const segment of segments) {
      expect(allowed.has(segment),
        `fabricated text in render output: "${segment}"`).toBe(true);
    }
  });
});

describe("latency panel behavior", () => {
  it("renders the recorded timings with a green sub-2s indicator", () => {
    const payload: ChatResponse = fixtures.chatDefault;
    const html = renderLatencyPanel(payload.timings);
    expect(html).toContain("stage1_formulation");
    expect(html).toContain("retrieval");
    expect(html).toContain("ranking");
    expect(html).toContain("e2e green"); // recorded run is millisecond-scale
  });

  it("hides the panel for the recorded smalltalk turn", async () => {
    const api = new FixtureAgentApi(fixtures);
    let state = await establishedSession(api);
    state = await sendThrough(api, state, "hi!");
    expect(state.latency).toEqual([]);
    expect(renderLatencyPanel(state.latency)).toBe("");
  });
});

describe("failure handling", () => {
  it("server error adds no phantom turn and offers retry", async () => {
    const api = new FixtureAgentApi(fixtures);
    let state = await establishedSession(api);
    state = await sendThrough(api, state, SKIING_PROMPT);
    const turnsBefore = state.turns.length;

    api.failNextChat = true;
    state = await sendThrough(api, state, "this one fails");
    expect(state.turns.length).toBe(turnsBefore);
    expect(state.transportError).toBeTruthy();
    expect(renderApp(state)).toContain('class="retry"');
    expect(state.pendingMessage).toBe("this one fails");
  });

  it("unknown products reject with the typed error body", async () => {
    const api = new FixtureAgentApi(fixtures);
    await expect(api.getProduct("NOPE")).rejects.toMatchObject({
      code: fixtures.error.code,
    });
  });
});

describe("cart flow", () => {
  it("badge counts server-confirmed items and dedupes double adds", async () => {
    const api = new FixtureAgentApi(fixtures);
    let state = await establishedSession(api);
    state = applyCart(state, (await api.addToCart(state.sessionId!, "P0141")).cart);
    expect(state.cart).toHaveLength(1);
    state = applyCart(state, (await api.addToCart(state.sessionId!, "P0141")).cart);
    expect(state.cart).toHaveLength(1); // server dedupes; UI mirrors it
    expect(renderApp(state)).toContain("Cart (1)");
  });
});
