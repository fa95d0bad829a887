#!/usr/bin/env python3
"""Regenerate tests/fixtures/catalog_500.jsonl (500 synthetic products,
seeded RNG so the file is stable byte-for-byte)."""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "catalog_500.jsonl"

SEED = 42

COLORS = ["black", "white", "blue", "red", "grey", "green", "orange", "silver"]
SIZES = ["s", "m", "l", "xl"]

# (category, count, brands, title maker, description pool, attrs maker, price range)
SPECS = [
    ("electronics/power-banks", 39,
     ["Anker", "PowerCore", "Veho", "Belkin"],
     lambda rng, b: f"{b} {rng.choice(['10000mAh', '20000mAh', '5000mAh'])} "
                    f"{rng.choice(['portable charger', 'power bank', 'battery pack'])}",
     ["Fast charging on the go.", "Slim body with dual ports.",
      "Airline-safe capacity for travel.", "Keeps phones alive through long days."],
     lambda rng: {"capacity": rng.choice(["5000mah", "10000mah", "20000mah"]),
                  "connector": rng.choice(["usb-c", "micro-usb"]),
                  "color": rng.choice(COLORS)},
     (19, 89)),
    ("electronics/action-cameras", 34,
     ["GoPro", "Insta360", "Akaso", "DJI"],
     lambda rng, b: f"{b} {rng.choice(['Hero', 'MAX', 'Trail', 'Dive'])} "
                    f"{rng.choice(['action camera', '360 camera', 'helmet camera'])}",
     ["Waterproof and shockproof for sports.", "Stabilized 4K footage.",
      "Mounts anywhere for hands-free filming.", "Built for snow, surf and trail."],
     lambda rng: {"resolution": rng.choice(["1080p", "4k", "5k"]),
                  "waterproof": rng.choice(["yes", "no"]),
                  "color": rng.choice(COLORS)},
     (79, 499)),
    ("electronics/phone-cases", 38,
     ["OtterBox", "Spigen", "MountReady", "Lifeproof"],
     lambda rng, b: f"{b} {rng.choice(['rugged', 'slim', 'clear', 'mount ready'])} "
                    f"{rng.choice(['phone case', 'protective case'])}",
     ["Drop protection without bulk.", "Grippy edges and raised bezel.",
      "Cold-weather rated shell.", "Locks onto bike and helmet mounts."],
     lambda rng: {"material": rng.choice(["tpu", "polycarbonate", "leather"]),
                  "color": rng.choice(COLORS)},
     (9, 49)),
    ("electronics/headphones", 34,
     ["Sony", "Bose", "Jabra", "SoundCore"],
     lambda rng, b: f"{b} {rng.choice(['wireless', 'noise cancelling', 'sport'])} "
                    f"{rng.choice(['headphones', 'earbuds'])}",
     ["All-day battery and rich bass.", "Sweat resistant for workouts.",
      "Active noise cancelling for commutes.", "Secure fit for running."],
     lambda rng: {"wireless": "yes", "color": rng.choice(COLORS)},
     (29, 349)),
    ("electronics/chargers", 29,
     ["Anker", "Belkin", "Aukey"],
     lambda rng, b: f"{b} {rng.choice(['65W', '30W', 'dual port'])} "
                    f"{rng.choice(['wall charger', 'car charger', 'charging station'])}",
     ["Charges laptops and phones at full speed.", "Compact GaN design.",
      "Two devices at once."],
     lambda rng: {"connector": rng.choice(["usb-c", "usb-a"]),
                  "color": rng.choice(COLORS)},
     (12, 79)),
    ("clothing/gloves", 34,
     ["Vertex", "NorthPeak", "HeatWave", "Hestra"],
     lambda rng, b: f"{b} {rng.choice(['heated', 'insulated', 'touchscreen', 'ski'])} gloves "
                    f"{rng.choice(['II', 'pro', 'lite', ''])}".strip(),
     ["Keeps hands warm in deep cold.", "Touchscreen fingertips, waterproof shell.",
      "Battery heated panels for the lift.", "Grippy palm for poles and zippers."],
     lambda rng: {"size": rng.choice(SIZES), "heated": rng.choice(["yes", "no"]),
                  "color": rng.choice(COLORS)},
     (24, 199)),
    ("clothing/jackets", 29,
     ["NorthPeak", "Patagonia", "Columbia"],
     lambda rng, b: f"{b} {rng.choice(['down', 'shell', 'insulated', '3-in-1'])} jacket",
     ["Windproof and warm.", "Packs into its own pocket.",
      "Pit zips and powder skirt for the slopes."],
     lambda rng: {"size": rng.choice(SIZES), "color": rng.choice(COLORS)},
     (59, 399)),
    ("shoes/running", 49,
     ["StrideMax", "Nike", "Brooks", "Asics", "ArchGuard"],
     lambda rng, b: f"{b} {rng.choice(['Glide', 'Motion', 'Tempo', 'Cloud'])} "
                    f"{rng.choice(['4', '7', 'GT', 'XT'])} running shoes",
     ["Cushioned daily trainer with arch support.", "Responsive foam for tempo days.",
      "Stability plate guides each stride.", "Breathable mesh upper, grippy outsole."],
     lambda rng: {"size": rng.choice(["8", "9", "10", "11", "12"]),
                  "support": rng.choice(["arch support", "neutral"]),
                  "color": rng.choice(COLORS)},
     (55, 180)),
    ("shoes/hiking", 29,
     ["Merrell", "Salomon", "Keen"],
     lambda rng, b: f"{b} {rng.choice(['Trail', 'Summit', 'Ridge'])} hiking "
                    f"{rng.choice(['boots', 'shoes'])}",
     ["Ankle support on rocky trails.", "Waterproof membrane, aggressive tread."],
     lambda rng: {"size": rng.choice(["8", "9", "10", "11"]),
                  "waterproof": rng.choice(["yes", "no"]),
                  "color": rng.choice(COLORS)},
     (69, 220)),
    ("sports/ski-gear", 34,
     ["Atomic", "Smith", "Giro", "Burton"],
     lambda rng, b: f"{b} {rng.choice(['alpine', 'freeride', 'touring'])} "
                    f"{rng.choice(['ski goggles', 'ski helmet', 'ski poles', 'snowboard bindings'])}",
     ["Anti-fog lens with wide field of view.", "Lightweight protection for the slopes.",
      "Built for powder days and park laps."],
     lambda rng: {"size": rng.choice(SIZES), "color": rng.choice(COLORS)},
     (39, 299)),
    ("home/kitchen", 49,
     ["ChefSteel", "BrewMate", "OXO", "Lodge"],
     lambda rng, b: f"{b} {rng.choice(['santoku 7in', 'cast iron skillet', 'coffee grinder', 'mixing bowl set', 'chef knife'])}",
     ["Restaurant-grade tools for home cooks.", "Even heat and easy cleanup.",
      "Burr grinding for consistent coffee.", "Dishwasher safe."],
     lambda rng: {"material": rng.choice(["steel", "cast iron", "ceramic"]),
                  "color": rng.choice(COLORS)},
     (14, 159)),
    ("home/decor", 29,
     ["Hearth", "Loom", "Nordic"],
     lambda rng, b: f"{b} {rng.choice(['throw blanket', 'table lamp', 'wall print', 'ceramic vase'])}",
     ["Softens any living room.", "Warm light for reading corners."],
     lambda rng: {"color": rng.choice(COLORS)},
     (19, 129)),
    ("toys/games", 29,
     ["BrickWorks", "Ravens", "PlayForge"],
     lambda rng, b: f"{b} {rng.choice(['building set', 'strategy board game', 'puzzle 1000pc'])}",
     ["Hours of screen-free play.", "Two to six players, forty-five minutes."],
     lambda rng: {"age": rng.choice(["6+", "8+", "12+"])},
     (12, 99)),
    ("beauty/skincare", 29,
     ["DermaPure", "GlowLab"],
     lambda rng, b: f"{b} {rng.choice(['daily moisturizer', 'vitamin c serum', 'mineral sunscreen spf50'])}",
     ["Fragrance free and dermatologist tested.", "Lightweight, absorbs fast."],
     lambda rng: {"skin type": rng.choice(["dry", "oily", "all"])},
     (9, 59)),
    ("books/fiction", 14,
     ["Foglight Press", "Meridian Books"],
     lambda rng, b: f"{rng.choice(['The Glass Harbor', 'Winter Orbit', 'A Quiet Machine', 'Salt and Starlight', 'The Cartographer'])} "
                    f"({rng.choice(['paperback', 'hardcover'])})",
     ["A page-turner praised by critics.", "The acclaimed debut novel."],
     lambda rng: {"format": rng.choice(["paperback", "hardcover"])},
     (8, 32)),
]

# Hand-placed product the retrieval golden tests pin on: its title matches
# the power-bank hypothetical's generic item exactly.
SPECIAL = {
    "title": "USB-C power bank 10000mAh",
    "description": "Slim USB-C power bank for cold weather trips; fast charge for phones and cameras.",
    "category": "electronics/power-banks",
    "brand": "Veho",
    "price": 39.99,
    "currency": "USD",
    "attributes": {"capacity": "10000mah", "connector": "usb-c", "color": "black"},
    "in_stock": True,
}


def main() -> None:
    rng = random.Random(SEED)
    rows = []
    for category, count, brands, title_fn, desc_pool, attrs_fn, (lo, hi) in SPECS:
        for _ in range(count):
            brand = rng.choice(brands)
            rows.append({
                "title": title_fn(rng, brand),
                "description": rng.choice(desc_pool),
                "category": category,
                "brand": brand,
                "price": round(rng.uniform(lo, hi), 2),
                "currency": "USD",
                "attributes": attrs_fn(rng),
                "in_stock": rng.random() < 0.95,
            })
    rows.append(dict(SPECIAL))
    assert len(rows) == 500, len(rows)

    rng.shuffle(rows)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        for index, row in enumerate(rows, start=1):
            fh.write(json.dumps({"id": f"P{index:04d}", **row}, sort_keys=False) + "\n")
    print(f"wrote {OUT} ({len(rows)} products)")


if __name__ == "__main__":
    main()
