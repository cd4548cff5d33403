"""CSV / JSON-lines serialisation of experiment records.

Floats are written with ``repr`` so they parse back bit-for-bit. In CSV,
list-valued fields are space-separated and missing values are empty.
"""

import csv
import io
import json


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return " ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_records(records, fields, as_json=False):
    if as_json:
        return "".join(json.dumps({f: r.get(f) for f in fields}) + "\n" for r in records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for r in records:
        writer.writerow([_csv_value(r.get(f)) for f in fields])
    return buf.getvalue()


def _parse_scalar(s):
    if s == "":
        return None
    for cast in (int, float):
        try:
            return cast(s)
        except ValueError:
            pass
    return s


LIST_FIELDS = {"weights", "normalized_weights"}


def parse_records(text):
    """Inverse of :func:`format_records` for either format."""
    text = text.strip()
    if not text:
        return []
    if text.startswith("{"):
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    out = []
    for row in body:
        rec = {}
        for f, v in zip(header, row):
            if f in LIST_FIELDS:
                rec[f] = [float(x) for x in v.split()] if v else []
            else:
                rec[f] = _parse_scalar(v)
        out.append(rec)
    return out
