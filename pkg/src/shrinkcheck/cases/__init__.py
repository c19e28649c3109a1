"""Exact step-chain verification of the limit-point case analysis."""
from .catalog import (CASES, CaseReport, GapReport, StepCheck, build_case, check_step, gradh_squared_polynomial,
                      s_gap_check, simons_terminal_polynomial, verify_all, verify_case)
from .chain import ConstraintSet, StepMismatch, StepRecord, UnknownCase, UnknownStep
from .limit import S, LimitPoint

__all__ = ["CASES", "CaseReport", "ConstraintSet", "GapReport", "LimitPoint", "S", "StepCheck", "StepMismatch",
           "StepRecord", "UnknownCase", "UnknownStep", "build_case", "check_step", "gradh_squared_polynomial",
           "s_gap_check", "simons_terminal_polynomial", "verify_all", "verify_case"]
