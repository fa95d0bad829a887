#!/usr/bin/env python3
"""Record real agent-service responses as frontend contract fixtures.

Runs the service in-process (stub LLM backend, 500-product fixture
catalog) and captures the exact JSON the HTTP API returns, so the webui
tests exercise genuine payloads.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from shopagent.service import AppConfig, build_state, create_app

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "frontend" / "fixtures"


def dump(name: str, payload) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote frontend/fixtures/{name}")


def main() -> None:
    state = build_state(AppConfig(),
                        catalog_source=ROOT / "tests" / "fixtures" / "catalog_500.jsonl")
    client = TestClient(create_app(state), raise_server_exceptions=False)

    session = client.post("/v1/sessions").json()
    dump("session.json", session)
    session_id = session["session_id"]

    chat = client.post("/v1/chat", json={
        "session_id": session_id,
        "message": "Suggest tech accessories for skiing",
    }).json()
    dump("chat_skiing.json", chat)

    smalltalk = client.post("/v1/chat", json={
        "session_id": session_id, "message": "hi!",
    }).json()
    dump("chat_smalltalk.json", smalltalk)

    first_product = chat["products"][0]["id"]
    cart = client.post(f"/v1/cart/{session_id}", json={"ref": first_product}).json()
    dump("cart.json", cart)

    product = client.get(f"/v1/products/{first_product}").json()
    dump("product.json", product)

    error = client.post("/v1/chat", json={"session_id": "missing", "message": "x"})
    dump("error.json", error.json())

    dump("health.json", client.get("/v1/health").json())


if __name__ == "__main__":
    main()
