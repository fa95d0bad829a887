// Browser bootstrap: wires the pure state/render modules to the DOM.
// `?fixtures=1` runs against the recorded fixture server instead of a
// live agent-service (offline development mode).

import { HttpAgentApi, ApiRequestError } from "./api.js";
import { FixtureAgentApi, loadFixtures } from "./fixtureServer.js";
import { renderApp } from "./render.js";
import {
  applyCart,
  applyChatFailure,
  applyChatSuccess,
  beginSend,
  initialState,
  withSession,
} from "./state.js";
import type { AgentApi } from "./types.js";

async function makeApi(): Promise<AgentApi> {
  const params = new URLSearchParams(window.location.search);
  if (params.get("fixtures") === "1") {
    return new FixtureAgentApi(await loadFixtures());
  }
  return new HttpAgentApi(params.get("base") ?? "");
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  const input = document.getElementById("message") as HTMLInputElement;
  const sendButton = document.getElementById("send") as HTMLButtonElement;
  if (!root || !input || !sendButton) {
    throw new Error("missing #app, #message or #send");
  }

  const api = await makeApi();
  let state = initialState();

  const paint = () => {
    root.innerHTML = renderApp(state);
    input.disabled = state.inFlight;
    sendButton.disabled = state.inFlight;
    for (const button of root.querySelectorAll<HTMLButtonElement>(".add-to-cart")) {
      button.addEventListener("click", () => addToCart(button.dataset.id ?? ""));
    }
    root.querySelector<HTMLButtonElement>(".retry")
      ?.addEventListener("click", () => retry());
  };

  const send = async (text: string) => {
    const next = beginSend(state, text);
    if (next === null) {
      return; // empty input or a request already in flight
    }
    state = next;
    paint();
    try {
      const response = await api.chat(state.sessionId!, state.pendingMessage!);
      state = applyChatSuccess(state, response);
      input.value = "";
    } catch (error) {
      const reason = error instanceof ApiRequestError
        ? `${error.code}: ${error.message}` : "network error";
      state = applyChatFailure(state, reason);
    }
    paint();
  };

  const retry = () => {
    const pending = state.pendingMessage;
    if (pending !== null) {
      state = { ...state, pendingMessage: null };
      void send(pending);
    }
  };

  const addToCart = async (productId: string) => {
    if (!productId || state.sessionId === null) {
      return;
    }
    try {
      const response = await api.addToCart(state.sessionId, productId);
      state = applyCart(state, response.cart); // badge reflects server truth
      paint();
    } catch {
      // cart unchanged on failure (offline etc.)
    }
  };

  sendButton.addEventListener("click", () => void send(input.value));
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void send(input.value);
    }
  });

  const session = await api.createSession();
  state = withSession(state, session.session_id);
  paint();
}

void boot();
