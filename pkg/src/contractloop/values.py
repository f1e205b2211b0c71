"""JSON-safe encoding for contract values.

JSON has no NaN or infinities; non-finite decimals are stored as a tagged
object {"$decimal": "NaN" | "Infinity" | "-Infinity"} so persisted test
inputs and violation witnesses survive a round trip exactly. Negative zero
is JSON-native and needs no tag.
"""

import math

_TAG = "$decimal"
_SENTINELS = {"NaN": float("nan"), "Infinity": float("inf"), "-Infinity": float("-inf")}


def encode_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return {_TAG: "NaN"}
        return {_TAG: "Infinity" if value > 0 else "-Infinity"}
    if isinstance(value, list):
        return [encode_value(v) for v in value]
    if isinstance(value, dict):
        return {k: encode_value(v) for k, v in value.items()}
    return value


def decode_value(value):
    if isinstance(value, dict):
        if set(value) == {_TAG}:
            return _SENTINELS[value[_TAG]]
        return {k: decode_value(v) for k, v in value.items()}
    if isinstance(value, list):
        return [decode_value(v) for v in value]
    return value


def encode_env(mapping):
    return {name: encode_value(value) for name, value in mapping.items()}


def decode_env(mapping):
    return {name: decode_value(value) for name, value in mapping.items()}
