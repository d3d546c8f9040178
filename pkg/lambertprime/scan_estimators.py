#!/usr/bin/env python3
"""
Scan estimators and extract their parameter schemas.
Every module listed in AVAILABLE_ESTIMATORS is imported and described by its
id, the table column it predicts, and the JSON schema of its Params model.
"""
from typing import Any, Dict, List

from .base import import_estimator
from .config import AVAILABLE_ESTIMATORS
from .structured_output import get_logger

logger = get_logger(__name__)


def scan_all_estimators() -> List[Dict[str, Any]]:
    """
    Scan all estimators and return their metadata.

    Returns:
        List of estimator metadata dictionaries
    """
    estimators = []

    for dotted in AVAILABLE_ESTIMATORS:
        try:
            Model = import_estimator(dotted)
        except (ImportError, AttributeError, ValueError) as e:
            logger.warning(f"Error scanning {dotted}: {e}")
            continue

        params_class = Model.params_class()
        module_name = dotted.split('.', 1)[1]
        estimators.append({
            'name': module_name,
            # Convert snake_case to Title Case
            'label': module_name.replace('_', ' ').title(),
            'truth': Model.truth,
            'needs_pi': Model.needs_pi,
            'params_schema': params_class.model_json_schema(),
        })
        logger.debug(f"Scanned: {dotted}")

    return estimators
