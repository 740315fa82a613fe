"""Mechanism, analysis and closed forms for Jubilee."""

from jubilee.core.analysis import run_verification
from jubilee.core.mechanism import MarketParams, Outcome, TypeProfile, settle

__all__ = ["run_verification", "settle", "MarketParams", "Outcome", "TypeProfile"]
