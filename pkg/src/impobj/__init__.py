"""Imperative object calculus: evaluator, type checker and step-indexed model."""
import sys

__version__ = "0.1.0"

# Syntax walks recurse once per constructor and diverging runs grow terms by
# roughly one level every two steps. 10000 frames fits the default 8 MiB stack.
RECURSION_LIMIT = 10_000
if sys.getrecursionlimit() < RECURSION_LIMIT:
    sys.setrecursionlimit(RECURSION_LIMIT)
