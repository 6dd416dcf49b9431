"""Desk-scale laboratory for subsequential and weighted mean ergodic averages.

The package classifies growth functions, generates the integer sequences
and index sets the averaging theorems quantify over, builds unimodular
weight sequences with certified phase reduction, and computes Cesaro
averages of operator powers over models whose inner products are exact.
"""

__version__ = "0.1.0"

from .expr import (HardyExpr, parse, to_string, differentiate, evaluate,
                   T, const, ln, exp, BelowValidityError, ParseError)
from .classify import (classify_Pm, classify_Pm_prime, classify_Ml,
                       compare_growth, GrowthClass, SuperpolynomialError,
                       NotEventuallyPositiveError)
from .sequences import (SubsequenceSpec, Perturbation, GeneratedSequence,
                        generate_a, build_bk, build_bk_bruteforce, BkTable,
                        ratio_diagnostics, bk_diagnostics, monotone_threshold)
from .index_sets import (IndexSet, density, extract_Akm, regularity_report,
                         default_checkpoints, WordStats)
from .weights import (WeightSpec, weyl_test, boshernitzan_trichotomy, q_test,
                      scalar_weighted_average, q2_tuples, tuple_trace,
                      QVerdict, Trichotomy, phase_of_multiples)
from .operators import (BilateralShift, SimilarShift, DiagonalOperator,
                        MatrixOperator, DiagEntry, VectorModel, gram,
                        power_bound, jgdl_split, parse_model, ModelError)
from .averaging import (ExperimentConfig, AverageTrace, vector_average,
                        difference_average, weak_average, verdict,
                        brute_force_norm2, materialized_norm2)
from .traces import ScalarTrace, assess
from .evalbulk import BulkEvaluator, PrecisionExhaustedError
