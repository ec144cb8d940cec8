"""Articulated-object manipulation sandbox.

Subpackages cover the pipeline end to end: procedural scenes (`scene`),
ray-cast rendering (`render`), affordance maps (`affordance`), prompt/answer
dataset emission (`dataset`), the impedance-feedback direction optimizer
(`control`), pose-proposal policies with test-time adaptation (`policy`),
and the evaluation harness plus CLI (`harness`, `cli`).
"""

__version__ = "0.1.0"
