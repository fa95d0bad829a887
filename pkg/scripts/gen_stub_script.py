#!/usr/bin/env python3
"""Regenerate the packaged demo stub script (src/shopagent/data/stub_script.json).

The script is the deterministic LLM double used by the test suite, the
CLI demo and the bench harness. Rule order matters: specific matches
first, per-template catch-alls last.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "shopagent" / "data" / "stub_script.json"

SKIING_HYPOTHETICALS = [
    {
        "category": "Heated Tech Gloves",
        "specific_item": "Vertex II",
        "generic_item": "Generic heated gloves",
        "relevance_note": "Keeps hands warm on the lift while still working a touchscreen.",
    },
    {
        "category": "Power Banks",
        "specific_item": "Veho 10,000mAh",
        "generic_item": "USB-C power bank",
        "relevance_note": "Cold weather drains batteries fast; spare charge keeps devices alive on the mountain.",
    },
    {
        "category": "Action Cameras",
        "specific_item": "GoPro MAX 360",
        "generic_item": "360 cameras",
        "relevance_note": "Captures full-panorama runs hands-free.",
    },
    {
        "category": "Phone Cases",
        "specific_item": "Mount Ready Case",
        "generic_item": "Protective case",
        "relevance_note": "Shields a phone from snow, drops and cold.",
    },
]

RUNNING_HYPOTHETICALS = [
    {
        "category": "Running Shoes",
        "specific_item": "StrideMax Glide 4",
        "generic_item": "cushioned running shoes",
        "relevance_note": "Daily trainer with structured arch support under a hundred dollars.",
    },
    {
        "category": "Stability Running Shoes",
        "specific_item": "ArchGuard Motion",
        "generic_item": "stability running shoes with arch support",
        "relevance_note": "Built-in arch support for overpronation on long runs.",
    },
]

CAMERA_HYPOTHETICALS = [
    {
        "category": "Action Cameras",
        "specific_item": "GoPro MAX 360",
        "generic_item": "360 cameras",
        "relevance_note": "Rugged, waterproof capture for sports.",
    },
    {
        "category": "Camera Accessories",
        "specific_item": "ChestMount Pro",
        "generic_item": "camera chest mount harness",
        "relevance_note": "Hands-free filming on the move.",
    },
]

GLOVES_HYPOTHETICALS = [
    {
        "category": "Heated Tech Gloves",
        "specific_item": "Vertex II",
        "generic_item": "heated gloves touchscreen",
        "relevance_note": "Warm hands without taking the gloves off to type.",
    },
]

KITCHEN_HYPOTHETICALS = [
    {
        "category": "Kitchen Gear",
        "specific_item": "ChefSteel Santoku 7in",
        "generic_item": "chef knife kitchen",
        "relevance_note": "A sharp all-rounder upgrades every recipe.",
    },
    {
        "category": "Small Appliances",
        "specific_item": "BrewMate Grinder",
        "generic_item": "coffee grinder electric",
        "relevance_note": "Fresh grounds make better coffee at home.",
    },
]

GENERIC_HYPOTHETICALS = [
    {
        "category": "Popular Picks",
        "specific_item": "",
        "generic_item": "popular products best sellers",
        "relevance_note": "Broad best-seller sweep when the request is unspecific.",
    },
]


def rule(template_id, contains, response, delay_s=None):
    entry = {"template_id": template_id, "contains": contains,
             "response": response if isinstance(response, str) else json.dumps(response)}
    if delay_s:
        entry["delay_s"] = delay_s
    return entry


RULES = [
    # --- skiing golden flow ---
    rule("stage1.attrs", "skiing",
         [{"name": "category", "value": "tech accessories"},
          {"name": "activity", "value": "skiing"}]),
    rule("stage1.formulate", "skiing",
         {"category": "tech accessories",
          "attributes": [{"name": "activity", "value": "skiing"}],
          "values": ["skiing", "winter sports", "cold weather"]}),
    rule("stage1.hyde", "skiing", SKIING_HYPOTHETICALS),
    # --- running shoes (budget + feature constraints) ---
    rule("stage1.attrs", "running shoes",
         [{"name": "category", "value": "running shoes"},
          {"name": "price", "value": "under $100"},
          {"name": "feature", "value": "arch support"}]),
    rule("stage1.formulate", "running shoes",
         {"category": "shoes/running",
          "attributes": [{"name": "feature", "value": "arch support"}],
          "values": ["running", "jogging"]}),
    rule("stage1.hyde", "running", RUNNING_HYPOTHETICALS),
    # --- bare price refinement turns ("under $100") ---
    rule("stage1.attrs", "under $100",
         [{"name": "price", "value": "under $100"}]),
    rule("stage1.hyde", "under $100", RUNNING_HYPOTHETICALS),
    # --- other themed workloads ---
    rule("stage1.attrs", "camera",
         [{"name": "category", "value": "action cameras"}]),
    rule("stage1.hyde", "camera", CAMERA_HYPOTHETICALS),
    rule("stage1.attrs", "gloves",
         [{"name": "category", "value": "gloves"}]),
    rule("stage1.hyde", "gloves", GLOVES_HYPOTHETICALS),
    rule("stage1.attrs", "kitchen",
         [{"name": "category", "value": "kitchen"}]),
    rule("stage1.hyde", "kitchen", KITCHEN_HYPOTHETICALS),
    # --- intent routing ---
    rule("agent.intent", "to my cart", {"intent": "cart_add"}),
    rule("agent.intent", "add the", {"intent": "cart_add"}),
    rule("agent.intent", "similar to", {"intent": "compare"}),
    rule("agent.intent", "hi!", {"intent": "smalltalk"}),
    rule("agent.intent", "hello", {"intent": "smalltalk"}),
    rule("agent.intent", "thank", {"intent": "smalltalk"}),
    # anchored to message phrasing: the template wording itself mentions
    # the bare intent names, so a bare "recommend" would match everything
    rule("agent.intent", "recommend me", {"intent": "recommend"}),
    rule("agent.intent", None, {"intent": "search"}),
    # --- per-template catch-alls ---
    rule("stage1.attrs", None, [{"name": "category", "value": "general"}]),
    rule("stage1.formulate", None, {"category": "", "attributes": [], "values": []}),
    rule("stage1.hyde", None, GENERIC_HYPOTHETICALS),
    rule("rank.rerank", None, []),
    rule("eval.quality", None, {"score": 3, "rationale": "stub default"}),
    rule("eval.pairwise", None, {"winner": "tie", "rationale": "stub default"}),
    rule("agent.smalltalk", None,
         "Hi there! Tell me what you are shopping for and I will dig through the catalog."),
    rule("profile.summary", None,
         "Frequent electronics shopper who also buys outdoor gear; responds to mid-range prices."),
]


def main() -> None:
    payload = {"version": 1, "default_response": "OK.", "rules": RULES}
    OUT.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(RULES)} rules)")


if __name__ == "__main__":
    main()
