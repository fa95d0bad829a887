// HTTP client for the agent-service JSON API.

import type {
  AgentApi,
  ApiErrorBody,
  CartResponse,
  ChatResponse,
  ProductDetail,
  SessionResponse,
} from "./types.js";

export class ApiRequestError extends Error {
  readonly code: string;
  readonly traceId: string;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message || `request failed (${status})`);
    this.status = status;
    this.code = body.code || "unknown";
    this.traceId = body.trace_id || "";
  }
}

export class HttpAgentApi implements AgentApi {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiRequestError(response.status, body as ApiErrorBody);
    }
    return body as T;
  }

  createSession(): Promise<SessionResponse> {
    return this.request("/v1/sessions", { method: "POST", body: "{}" });
  }

  chat(sessionId: string, message: string): Promise<ChatResponse> {
    return this.request("/v1/chat", {
      method: "POST",
      body: JSON.stringify({ session_id: sessionId, message }),
    });
  }

  addToCart(sessionId: string, ref: string): Promise<CartResponse> {
    return this.request(`/v1/cart/${encodeURIComponent(sessionId)}`, {
      method: "POST",
      body: JSON.stringify({ ref }),
    });
  }

  getProduct(id: string): Promise<ProductDetail> {
    return this.request(`/v1/products/${encodeURIComponent(id)}`);
  }
}
