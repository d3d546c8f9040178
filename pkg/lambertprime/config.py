"""
Configuration file for lambertprime.
This file contains constants only; tunable parameter sets are pydantic models
living next to the code that consumes them.
"""

# Working precision, in significant decimal digits
DEFAULT_PRECISION = 32
MIN_PRECISION = 16
GUARD_DIGITS = 10

# Desk-scale sieve bounds
SIEVE_CAPACITY = 10**10
SEGMENT_ODD_COUNT = 2**20

# Constants for estimator identification
AVAILABLE_ESTIMATORS = [
    "estimators.dusart_pi",
    "estimators.li_pi",
    "estimators.n_over_w",
    "estimators.gram_pi",
    "estimators.gram_inverse_pn",
    "estimators.cipolla_pn",
    "estimators.base_w_pn",
    "estimators.plouffe_g",
    "estimators.plouffe_f",
]

# Dusart's inequality is proven from here on
DUSART_PROVEN_FROM = 5394

# Shipped correction models (lambertprime/data/<name>.model)
SHIPPED_MODELS = ["g_large", "g_small", "f_inversion"]
DEFAULT_G_MODEL = "g_large"

# F polynomial correction range
F_POLY_RANGE = (10**16, 10**24)

# Strong-pseudoprime witnesses: the first 13 primes are a deterministic
# Miller-Rabin base set below this bound
MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
MR_DETERMINISTIC_BOUND = 3317044064679887385961981

OUTPUT_FORMATS = ["tsv", "csv", "json-lines"]
