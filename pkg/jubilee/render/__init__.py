"""Output rendering for Jubilee results."""

from jubilee.render.markdown import render_discrepancies, render_outcome, render_verification

__all__ = ["render_discrepancies", "render_outcome", "render_verification"]
