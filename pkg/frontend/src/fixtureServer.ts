// Offline development / contract-test backend: serves recorded payloads
// from fixtures/ instead of a live agent-service.

import { ApiRequestError } from "./api.js";
import type {
  AgentApi,
  ApiErrorBody,
  CartResponse,
  ChatResponse,
  ProductDetail,
  SessionResponse,
} from "./types.js";

export interface FixtureSet {
  session: SessionResponse;
  chatByKeyword: Record<string, ChatResponse>;
  chatDefault: ChatResponse;
  cart: CartResponse;
  product: ProductDetail;
  error: ApiErrorBody;
}

const clone = <T>(value: T): T => JSON.parse(JSON.stringify(value));

export class FixtureAgentApi implements AgentApi {
  private cartIds: string[] = [];
  failNextChat = false;

  constructor(private readonly fixtures: FixtureSet) {}

  async createSession(): Promise<SessionResponse> {
    return clone(this.fixtures.session);
  }

  async chat(_sessionId: string, message: string): Promise<ChatResponse> {
    if (this.failNextChat) {
      this.failNextChat = false;
      throw new ApiRequestError(500, clone(this.fixtures.error));
    }
    const lowered = message.toLowerCase();
    for (const [keyword, response] of Object.entries(this.fixtures.chatByKeyword)) {
      if (lowered.includes(keyword)) {
        return clone(response);
      }
    }
    return clone(this.fixtures.chatDefault);
  }

  async addToCart(_sessionId: string, ref: string): Promise<CartResponse> {
    if (!this.cartIds.includes(ref)) {
      this.cartIds.push(ref);
    }
    return { cart: [...this.cartIds] };
  }

  async getProduct(id: string): Promise<ProductDetail> {
    if (id !== this.fixtures.product.id) {
      throw new ApiRequestError(404, clone(this.fixtures.error));
    }
    return clone(this.fixtures.product);
  }
}

/** Browser helper: load the fixture JSON files over HTTP. */
export async function loadFixtures(base = "fixtures"): Promise<FixtureSet> {
  const get = async (name: string) => (await fetch(`${base}/${name}`)).json();
  const [session, skiing, smalltalk, cart, product, error] = await Promise.all([
    get("session.json"), get("chat_skiing.json"), get("chat_smalltalk.json"),
    get("cart.json"), get("product.json"), get("error.json"),
  ]);
  return {
    session,
    chatByKeyword: { skiing: skiing, "hi!": smalltalk },
    chatDefault: skiing,
    cart,
    product,
    error,
  };
}
