"""Clinical-text annotation platform.

Subpackages cover the clinical ontology catalog, standoff corpora with
nested mentions, inter-annotator agreement, a transition system for
nested mention recognition, a trainable action scorer, NERC evaluation,
a per-patient concept index and the HTTP API tying it together.
"""

__version__ = "0.1.0"
