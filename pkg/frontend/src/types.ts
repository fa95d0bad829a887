// Server payload shapes, mirroring the agent-service HTTP contract.

export interface ProductCard {
  id: string;
  title: string;
  price: number;
  currency: string;
  score: number;
  explanation: string | null;
  group?: string | null;
}

export interface ServerGroup {
  title: string;
  note?: string;
  product_ids: string[];
}

export interface TimingRow {
  stage: string;
  ms: number;
}

export interface ChatResponse {
  reply: string;
  intent: string;
  products: ProductCard[];
  groups?: ServerGroup[];
  timings: TimingRow[];
  degraded: boolean;
  error_code?: string;
}

export interface SessionResponse {
  session_id: string;
}

export interface CartResponse {
  cart: string[];
}

export interface ProductDetail {
  id: string;
  title: string;
  description: string;
  category: string;
  brand: string;
  price: number;
  currency: string;
  attributes: Record<string, string>;
  in_stock: boolean;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  trace_id: string;
}

export interface AgentApi {
  createSession(): Promise<SessionResponse>;
  chat(sessionId: string, message: string): Promise<ChatResponse>;
  addToCart(sessionId: string, ref: string): Promise<CartResponse>;
  getProduct(id: string): Promise<ProductDetail>;
}
