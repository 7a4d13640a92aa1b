import hashlib
import json

from pydantic import BaseModel as _BaseModel
from pydantic import ConfigDict


class BaseModel(_BaseModel):
    """Frozen pydantic base for configs and reports; infinities serialise as strings."""

    model_config = ConfigDict(extra="forbid", frozen=True, ser_json_inf_nan="strings")

    def dict_plain(self) -> dict:
        return json.loads(self.model_dump_json())

    def digest(self) -> str:
        """Stable sha256 of the canonical json dump."""
        payload = json.dumps(self.dict_plain(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()
