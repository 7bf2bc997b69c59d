"""Workbench for mixed-choice multiparty session calculi."""

__all__ = ["syntax", "semantics", "ltypes", "typecheck", "encode", "lcmv", "patterns", "corpus"]
