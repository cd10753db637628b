"""Python bindings for the SmartSnap harness.

Actions, configs, records and metric tables are plain dicts with the same
layout as the JSON written by the ``smartsnap`` command-line tool.
"""

from ._core import (
    ConfigError,
    Error,
    InvalidArgument,
    MissingTag,
    NumericError,
    TrajectoryClosed,
    TransportError,
    World,
    clipped_term,
    compute_advantages,
    compute_metrics,
    compute_reward,
    config_help,
    default_config,
    evaluate,
    parse_verdict,
    rollout,
    task,
    task_ids,
    train,
)

__all__ = [
    "ConfigError",
    "Error",
    "InvalidArgument",
    "MissingTag",
    "NumericError",
    "TrajectoryClosed",
    "TransportError",
    "World",
    "clipped_term",
    "compute_advantages",
    "compute_metrics",
    "compute_reward",
    "config_help",
    "default_config",
    "evaluate",
    "parse_verdict",
    "rollout",
    "task",
    "task_ids",
    "train",
]
