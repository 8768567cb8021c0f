import json
import sys

try:
    import jsonschema
except ImportError:
    print("jsonschema not installed, skipping")
    sys.exit(0)

schema = json.load(open(sys.argv[1]))
doc = json.load(open(sys.argv[2]))
jsonschema.validate(doc, schema)
print(f"{len(doc['rows'])} rows valid")
