"""
White-box and transfer attacks.
"""

from .blackbox import accuracy, craft_dataset, white_box_accuracy, worst_case_accuracy
from .craft import AdversarialBatch, craft, input_gradient
from .spec import AttackSpec

__all__ = [
    "AdversarialBatch",
    "AttackSpec",
    "accuracy",
    "craft",
    "craft_dataset",
    "input_gradient",
    "white_box_accuracy",
    "worst_case_accuracy",
]
