"""YAML loading tuned for vehicle documents.

Stock YAML 1.1 resolves ``ON``/``OFF``/``yes``/``no`` to booleans, which
destroys enum labels like OFF/ON. The loader here only treats ``true`` and
``false`` (any case) as booleans; everything else stays a string.
"""

from __future__ import annotations

import re

import yaml


class DocumentLoader(yaml.SafeLoader):
    pass


# Rebuild the implicit resolvers with a strict bool pattern.
DocumentLoader.yaml_implicit_resolvers = {
    key: [
        (tag, regexp)
        for tag, regexp in resolvers
        if tag != "tag:yaml.org,2002:bool"
    ]
    for key, resolvers in yaml.SafeLoader.yaml_implicit_resolvers.items()
}
DocumentLoader.add_implicit_resolver(
    "tag:yaml.org,2002:bool",
    re.compile(r"^(?:true|True|TRUE|false|False|FALSE)$"),
    list("tTfF"),
)


def load(text: str):
    return yaml.load(text, Loader=DocumentLoader)


def dump(data) -> str:
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)
