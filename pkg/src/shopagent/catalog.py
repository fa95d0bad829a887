"""Product catalog: data model, JSONL ingestion and attribute filtering.

The catalog is the grounded inventory every recommendation must come from.
A catalog is built once from a line-delimited JSON file and is immutable
afterwards; reloads build a fresh handle with a bumped generation counter
so concurrent readers can keep using the old one.

Catalog file format (one object per line):

    {"id": str, "title": str, "description": str, "category": str,
     "brand": str, "price": number, "currency": str,
     "attributes": {str: str}, "in_stock": bool}

Unknown keys are rejected in strict mode (the default) or ignored when
``allow_unknown_keys`` is set.
"""

from __future__ import annotations

import itertools
import json
import re
import unicodedata
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import CatalogError

__all__ = [
    "Product",
    "CatalogHandle",
    "FilterConstraints",
    "IngestReport",
    "ingest_catalog",
    "filter_products",
    "lookup",
    "normalize_attribute",
]

_REQUIRED_KEYS = {
    "id", "title", "description", "category", "brand",
    "price", "currency", "attributes", "in_stock",
}

_WS = re.compile(r"\s+")

# Process-wide monotonic generation counter; every built handle gets the
# next value, so a reload always observably bumps the generation.
_GENERATION = itertools.count(1)


def normalize_attribute(text: str) -> str:
    """Normalize an attribute name or value: NFC, trim, lowercase, collapse
    inner whitespace to single spaces."""
    text = unicodedata.normalize("NFC", text)
    return _WS.sub(" ", text.strip().lower())


def _normalize_category(raw: str) -> str:
    segments = [normalize_attribute(seg) for seg in raw.split("/")]
    return "/".join(seg for seg in segments if seg)


@dataclass(frozen=True)
class Product:
    """One catalog entry. Attribute names/values arrive pre-normalized."""

    id: str
    title: str
    description: str
    category: str  # canonical lowercase path, e.g. "electronics/power-banks"
    brand: str
    price: Decimal
    currency: str
    attributes: Mapping[str, str]
    in_stock: bool


@dataclass(frozen=True)
class CatalogHandle:
    """Immutable product table keyed by id, safe to share across threads."""

    products: Mapping[str, Product]
    generation: int

    def __len__(self) -> int:
        return len(self.products)

    def ids(self) -> Sequence[str]:
        return list(self.products.keys())


@dataclass
class FilterConstraints:
    """Conjunctive hard filters applied before any scoring."""

    category_prefix: Optional[str] = None
    attribute_equals: list[tuple[str, str]] = field(default_factory=list)
    price_min: Optional[Decimal] = None
    price_max: Optional[Decimal] = None
    in_stock_only: bool = True

    def __post_init__(self) -> None:
        if (self.price_min is not None and self.price_max is not None
                and self.price_min > self.price_max):
            raise ValueError("price_min must not exceed price_max")


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)


def _parse_product(obj: dict, *, allow_unknown_keys: bool) -> Product:
    """Validate one decoded JSONL object; raises ValueError with a reason."""
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")

    unknown = set(obj) - _REQUIRED_KEYS
    if unknown and not allow_unknown_keys:
        raise ValueError(f"unknown keys: {', '.join(sorted(unknown))}")
    missing = _REQUIRED_KEYS - set(obj)
    if missing:
        raise ValueError(f"missing keys: {', '.join(sorted(missing))}")

    pid = obj["id"]
    if not isinstance(pid, str) or not pid:
        raise ValueError("id must be a non-empty string")

    for key in ("title", "description", "brand"):
        if not isinstance(obj[key], str):
            raise ValueError(f"{key} must be a string")

    if not isinstance(obj["category"], str):
        raise ValueError("category must be a string")
    category = _normalize_category(obj["category"])
    if not category:
        raise ValueError("category must be non-empty")

    raw_price = obj["price"]
    if isinstance(raw_price, bool) or not isinstance(raw_price, (int, Decimal)):
        raise ValueError("price must be a number")
    price = Decimal(raw_price) if isinstance(raw_price, int) else raw_price
    try:
        if not price.is_finite():
            raise ValueError("price must be finite")
    except InvalidOperation as exc:  # pragma: no cover - Decimal oddities
        raise ValueError("price must be a number") from exc
    if price < 0:
        raise ValueError("negative price")

    currency = obj["currency"]
    if not isinstance(currency, str) or not re.fullmatch(r"[A-Za-z]{3}", currency):
        raise ValueError("currency must be a 3-letter code")

    raw_attrs = obj["attributes"]
    if not isinstance(raw_attrs, dict):
        raise ValueError("attributes must be an object")
    attributes: dict[str, str] = {}
    for name, value in raw_attrs.items():
        if not isinstance(value, str):
            raise ValueError(f"attribute {name!r} value must be a string")
        norm_name = normalize_attribute(name)
        if not norm_name:
            raise ValueError("attribute name must be non-empty")
        attributes[norm_name] = normalize_attribute(value)

    if not isinstance(obj["in_stock"], bool):
        raise ValueError("in_stock must be a boolean")

    return Product(
        id=pid,
        title=obj["title"],
        description=obj["description"],
        category=category,
        brand=obj["brand"].strip(),
        price=price,
        currency=currency.upper(),
        attributes=attributes,
        in_stock=obj["in_stock"],
    )


def _iter_lines(source: Union[str, Path, IO[str], Iterable[str]]) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        try:
            with open(source, encoding="utf-8") as fh:
                yield from fh
        except OSError as exc:
            raise CatalogError(f"cannot read catalog source {source}: {exc}") from exc
    else:
        yield from source


def ingest_catalog(
    source: Union[str, Path, IO[str], Iterable[str]],
    *,
    allow_unknown_keys: bool = False,
) -> tuple[CatalogHandle, IngestReport]:
    """Build a catalog from a JSONL stream.

    Every non-blank line either becomes a normalized :class:`Product` or a
    per-line rejection in the report; nothing is dropped silently.  The
    first occurrence of an id wins, later duplicates are rejected.
    """
    report = IngestReport()
    products: dict[str, Product] = {}

    for line_no, line in enumerate(_iter_lines(source), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            obj = json.loads(stripped, parse_float=Decimal)
        except json.JSONDecodeError as exc:
            report.rejected.append((line_no, f"invalid JSON: {exc.msg}"))
            continue
        try:
            product = _parse_product(obj, allow_unknown_keys=allow_unknown_keys)
        except ValueError as exc:
            report.rejected.append((line_no, str(exc)))
            continue
        if product.id in products:
            report.rejected.append((line_no, f"duplicate id: {product.id}"))
            continue
        products[product.id] = product
        report.accepted += 1

    handle = CatalogHandle(products=products, generation=next(_GENERATION))
    return handle, report


def _matches(product: Product, constraints: FilterConstraints) -> bool:
    if constraints.in_stock_only and not product.in_stock:
        return False
    if constraints.category_prefix is not None:
        prefix = _normalize_category(constraints.category_prefix)
        if prefix and not (product.category == prefix
                           or product.category.startswith(prefix + "/")):
            return False
    for name, value in constraints.attribute_equals:
        if product.attributes.get(normalize_attribute(name)) != normalize_attribute(value):
            return False
    if constraints.price_min is not None and product.price < constraints.price_min:
        return False
    if constraints.price_max is not None and product.price > constraints.price_max:
        return False
    return True


def filter_products(catalog: CatalogHandle, constraints: FilterConstraints) -> set[str]:
    """Ids of exactly the products satisfying all constraints (conjunctive).

    Unsatisfiable constraints yield an empty set, never an error.
    """
    return {p.id for p in catalog.products.values() if _matches(p, constraints)}


def lookup(catalog: CatalogHandle, product_id: str) -> Optional[Product]:
    """The ingested product, verbatim, or None. Ids are case-sensitive."""
    return catalog.products.get(product_id)
