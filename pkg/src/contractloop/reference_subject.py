"""Bundled reference subject: an ATM Account constructor speaking the
line-delimited call protocol on stdin/stdout.

Two variants: "buggy" stores its arguments verbatim with no validation;
"fixed" enforces the account-number, pin-range, and balance constraints
and reports illegal_argument for inputs that break them.
"""

import argparse
import json
import math
import sys

PROTOCOL_VERSION = 1
UNIT = "Account.new"

_FLOAT_SENTINELS = {"NaN": float("nan"), "Infinity": float("inf"), "-Infinity": float("-inf")}


def _decode_balance(value):
    if isinstance(value, str) and value in _FLOAT_SENTINELS:
        return _FLOAT_SENTINELS[value]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    return value


def _encode_balance(value):
    if isinstance(value, float):
        if math.isnan(value):
            return "NaN"
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
    return value


def construct_account(variant, account_number, pin, balance):
    """Returns the stored field map, or raises ValueError for the fixed
    variant's rejections."""
    if variant == "fixed":
        if account_number is None or account_number == "":
            raise ValueError("accountNumber must be non-null and non-empty")
        if not isinstance(pin, int) or isinstance(pin, bool) or not 0 <= pin <= 9999:
            raise ValueError("pin must be within [0, 9999]")
        if not isinstance(balance, float) or math.isnan(balance) or math.isinf(balance):
            raise ValueError("balance must be a finite number")
        if balance < 0:
            raise ValueError("balance must be non-negative")
    return {"accountNumber": account_number, "pin": pin, "balance": balance}


def handle_request(variant, request):
    call_id = request.get("call_id")
    if request.get("unit") != UNIT:
        return {
            "call_id": call_id,
            "status": "raised",
            "error": {"kind": "unknown_unit", "message": str(request.get("unit"))},
        }
    args = request.get("args", {})
    balance = _decode_balance(args.get("balance"))
    try:
        fields = construct_account(variant, args.get("accountNumber"), args.get("pin"), balance)
    except ValueError as error:
        return {
            "call_id": call_id,
            "status": "raised",
            "error": {"kind": "illegal_argument", "message": str(error)},
        }
    fields["balance"] = _encode_balance(fields["balance"])
    return {"call_id": call_id, "status": "returned", "result": None, "post_state": fields}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--variant", choices=["buggy", "fixed"], required=True)
    options = parser.parse_args(argv)

    print(json.dumps({"protocol_version": PROTOCOL_VERSION, "units": [UNIT]}), flush=True)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except ValueError:
            print(
                json.dumps(
                    {
                        "call_id": None,
                        "status": "raised",
                        "error": {"kind": "protocol", "message": "request is not JSON"},
                    }
                ),
                flush=True,
            )
            continue
        print(json.dumps(handle_request(options.variant, request)), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
