"""
Frozen regression fixtures
Empirical constants standing in for bounds that exist but have no known
value: nilprogression constants, all-scales tables, PSL2 diameters and
the GH upper-bound envelopes of the torus families.
"""

import json
import logging
import os
from typing import Any, Dict, Optional

import config
from errors import InvalidInput, check
from reports import encode

logger = logging.getLogger(__name__)

ENVELOPE_SLACK = 1e-12


def _normalize(value: Any) -> Any:
    """Plain JSON form, identical to what a load of the saved file returns"""
    return json.loads(json.dumps(encode(value), sort_keys=True))


class FixtureStore:
    """
    Versioned key/value file of frozen results

    In check mode a present key must match exactly (envelopes: bound from
    above) and an absent key is reported as unfrozen. In refresh mode every
    verified value is (re)written and saved by save().
    """

    def __init__(self, path: Optional[str] = None, refresh: bool = False):
        self.path = path or config.FIXTURES_PATH
        self.refresh = refresh
        self.entries: Dict[str, Any] = {}
        self.statuses: Dict[str, str] = {}
        self._dirty = False
        self.load()

    def load(self) -> None:
        if not os.path.exists(self.path):
            logger.warning(f"Fixtures file {self.path} not found, starting empty")
            return
        try:
            with open(self.path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidInput(f"fixtures file {self.path} is not valid JSON: {e}")
        version = data.get("version")
        if version != config.FIXTURES_VERSION:
            raise InvalidInput(
                f"fixtures file version {version} does not match {config.FIXTURES_VERSION}; rerun with --refresh-fixtures",
                {"version": version},
            )
        self.entries = data.get("entries", {})

    def save(self) -> None:
        if not self._dirty:
            return
        directory = os.path.dirname(self.path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            json.dump({"version": config.FIXTURES_VERSION, "entries": self.entries}, f, sort_keys=True, indent=2)
            f.write("\n")
        self._dirty = False
        logger.info(f"Fixtures written to {self.path} ({len(self.entries)} entries)")

    def _store(self, key: str, value: Any) -> str:
        self.entries[key] = value
        self._dirty = True
        return "refreshed"

    def verify(self, key: str, value: Any) -> str:
        """Compare value with the frozen entry; returns frozen / unfrozen / refreshed"""
        value = _normalize(value)
        if self.refresh:
            status = self._store(key, value)
        elif key not in self.entries:
            logger.warning(f"Fixture '{key}' is unfrozen; run with --refresh-fixtures to freeze it")
            status = "unfrozen"
        else:
            check(self.entries[key] == value, "value drifted from its frozen fixture", key=key, frozen=self.entries[key], computed=value)
            status = "frozen"
        self.statuses[key] = status
        return status

    def envelope(self, key: str) -> Optional[Dict[int, float]]:
        """Frozen upper envelope {size: bound}, or None"""
        if self.refresh or key not in self.entries:
            return None
        return {int(size): float(bound) for size, bound in self.entries[key].items()}

    def verify_envelope(self, key: str, values: Dict[int, float]) -> str:
        """Every computed value must stay at or below its frozen bound"""
        if self.refresh:
            merged = dict(self.entries.get(key, {}))
            merged.update({str(size): float(v) for size, v in values.items()})
            status = self._store(key, merged)
        elif key not in self.entries:
            logger.warning(f"Envelope '{key}' is unfrozen; run with --refresh-fixtures to freeze it")
            status = "unfrozen"
        else:
            frozen = self.envelope(key)
            for size, v in values.items():
                if size in frozen:
                    check(v <= frozen[size] + ENVELOPE_SLACK, "value above its frozen envelope", key=key, size=size, value=v, envelope=frozen[size])
            status = "frozen"
        self.statuses[key] = status
        return status
