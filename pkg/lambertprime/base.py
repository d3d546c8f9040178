#!/usr/bin/env python3
"""
Base utilities for estimator handling.
"""
import importlib
import os
from multiprocessing import Pool
from typing import Callable, Optional, Sequence, Type, TYPE_CHECKING

from .config import AVAILABLE_ESTIMATORS

if TYPE_CHECKING:
    from .estimators.base import PrimeEstimator


def import_estimator(estimator_name: str) -> Type['PrimeEstimator']:
    """
    Dynamically import an estimator module and return its Model class.

    Args:
        estimator_name: Estimator id ("cipolla_pn") or dotted name
            ("estimators.cipolla_pn")

    Returns:
        The Model class from the imported module

    Raises:
        ValueError: If the name is not one of AVAILABLE_ESTIMATORS
        ImportError: If the estimator module cannot be found
        AttributeError: If the module doesn't have a Model attribute

    Example:
        >>> Model = import_estimator('base_w_pn')
        >>> Model.estimate(10**6)['value']
    """
    dotted = estimator_name if estimator_name.startswith('estimators.') else f'estimators.{estimator_name}'
    if dotted not in AVAILABLE_ESTIMATORS:
        raise ValueError(
            f"Unknown estimator '{estimator_name}'. "
            f"Available: {', '.join(name.split('.', 1)[1] for name in AVAILABLE_ESTIMATORS)}"
        )

    try:
        module = importlib.import_module(f'lambertprime.{dotted}')
    except ImportError as e:
        raise ImportError(f"Estimator module '{dotted}' not found: {e}")
    if not hasattr(module, 'Model'):
        raise AttributeError(f"Module '{dotted}' does not have a 'Model' attribute")
    return module.Model


def resolve_jobs(n_jobs: Optional[int]) -> int:
    """None or 1 runs in-process; -1 uses every CPU."""
    if n_jobs is None:
        return 1
    if n_jobs < 0:
        return os.cpu_count() or 1
    return max(1, n_jobs)


def parallel_map(func: Callable, items: Sequence, n_jobs: Optional[int] = None,
                 on_result: Optional[Callable[[int], None]] = None) -> list:
    """
    Map ``func`` over ``items`` in worker processes, results in input order.

    ``func`` must be a module-level function and items picklable.
    ``on_result`` receives the number of results collected so far.
    """
    jobs = resolve_jobs(n_jobs)
    results = []
    if jobs == 1 or len(items) < 2:
        for item in items:
            results.append(func(item))
            if on_result:
                on_result(len(results))
        return results
    with Pool(processes=min(jobs, len(items))) as pool:
        for result in pool.imap(func, items, chunksize=max(1, len(items) // (4 * jobs))):
            results.append(result)
            if on_result:
                on_result(len(results))
    return results
