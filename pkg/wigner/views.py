import base64
import binascii
import json
import logging

from django.http import JsonResponse
from django.views.decorators.csrf import csrf_exempt

from .lab.diagnostics import parse_partition, validate_measure
from .lab.exceptions import PartitionError, SnapshotFormatError
from .lab.snapshots import decode_snapshot

logger = logging.getLogger(__name__)


@csrf_exempt
def validate_snapshot(request):
    """POST {"snapshot": <base64 WIG1 bytes>, "partition": "4x4"} -> measure report."""
    if request.method != "POST":
        return JsonResponse({"error": "Invalid HTTP method. Use POST."}, status=405)

    try:
        data = json.loads(request.body)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return JsonResponse({"error": "Body must be JSON"}, status=400)
    if not isinstance(data, dict) or not data.get("snapshot"):
        return JsonResponse({"error": "No snapshot data provided"}, status=400)

    try:
        payload = base64.b64decode(data["snapshot"], validate=True)
    except (binascii.Error, TypeError, ValueError):
        return JsonResponse({"error": "Invalid Base64 data"}, status=400)

    try:
        field = decode_snapshot(payload)
        report = validate_measure(field, parse_partition(data.get("partition", "4x4"), field.grid))
    except SnapshotFormatError as exc:
        return JsonResponse({"error": str(exc), "offset": exc.offset}, status=400)
    except PartitionError as exc:
        return JsonResponse({"error": str(exc)}, status=400)

    logger.info(f"snapshot validated: {report.classification}")
    return JsonResponse(report.as_dict())
