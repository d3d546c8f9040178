"""
lambertprime: Lambert W estimators for p(n) and pi(n), their correction
tables, and nearest-integer geometric progressions of primes.
"""

__version__ = "0.1.0"
