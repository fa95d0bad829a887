"""Grounded commerce search and recommendation agent.

Pipeline: query understanding (attribute extraction + structured
formulation) -> hypothetical-product generation -> dense retrieval against
a real catalog -> personalized ranking, wrapped in a session-aware agent
service with an evaluation harness, dataset exporters and a latency bench.
"""

__version__ = "0.1.0"
