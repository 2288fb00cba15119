"""Pipeline and service configuration with the deployed defaults.

Defaults: edge threshold 0.1, four photos per node, child-keyword floor 5.
Everything is overridable per run via CLI flags or the service config file.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .spots import PROVIDER_MODES, RANKING_MODES, SpotParams
from .tree import SCORE_MODES

LISTEN_ENV_VAR = "TAGTOUR_LISTEN"


@dataclass
class PipelineParams:
    """Knobs for corpus ingest, graph build, clustering, and tree layout."""

    threshold: float = 0.1
    min_appear: int = 1
    alpha: float = 0.5
    merge_threshold: float = 0.3
    key_quantile: float = 0.95
    key_min_degree: int = 3
    hub_min_edges: int = 2
    photos_per_node: int = 4
    child_min_appear: int = 5
    score_mode: str = "per_photo"

    def validate(self) -> None:
        if self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")
        if self.min_appear < 1:
            raise ValueError(f"min_appear must be >= 1, got {self.min_appear}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 < self.key_quantile <= 1.0:
            raise ValueError(f"key_quantile must be in (0, 1], got {self.key_quantile}")
        if self.key_min_degree < 0:
            raise ValueError(f"key_min_degree must be >= 0, got {self.key_min_degree}")
        if self.hub_min_edges < 0:
            raise ValueError(f"hub_min_edges must be >= 0, got {self.hub_min_edges}")
        if self.photos_per_node < 0:
            raise ValueError(f"photos_per_node must be >= 0, got {self.photos_per_node}")
        if self.child_min_appear < 0:
            raise ValueError(f"child_min_appear must be >= 0, got {self.child_min_appear}")
        if self.score_mode not in SCORE_MODES:
            raise ValueError(f"score_mode must be one of {SCORE_MODES}")

    def as_dict(self) -> dict:
        return asdict(self)


def validate_spot_params(params: SpotParams) -> None:
    if params.radius_m <= 0:
        raise ValueError(f"radius_m must be > 0, got {params.radius_m}")
    if params.min_nearby < 1:
        raise ValueError(f"min_nearby must be >= 1, got {params.min_nearby}")
    if not 0.0 <= params.min_relevance <= 1.0:
        raise ValueError(f"min_relevance must be in [0, 1], got {params.min_relevance}")
    if params.limit < 1:
        raise ValueError(f"limit must be >= 1, got {params.limit}")


@dataclass
class ServiceConfig:
    """Everything the HTTP service needs to come up."""

    corpus_path: Path
    pipeline: PipelineParams = field(default_factory=PipelineParams)
    spots: SpotParams = field(default_factory=SpotParams)
    provider: str = "fixture"
    provider_data: Path | None = None
    provider_mode: str = "photo_search"
    ranking_mode: str | None = None
    host: str = "127.0.0.1"
    port: int = 8000
    session_ttl_s: float = 3600.0

    def validate(self) -> None:
        self.pipeline.validate()
        validate_spot_params(self.spots)
        if self.provider_mode not in PROVIDER_MODES:
            raise ValueError(f"provider_mode must be one of {PROVIDER_MODES}")
        if self.ranking_mode is not None and self.ranking_mode not in RANKING_MODES:
            raise ValueError(f"ranking_mode must be one of {RANKING_MODES}")
        if not 0 < self.port < 65536:
            raise ValueError(f"port must be in 1..65535, got {self.port}")
        if self.session_ttl_s <= 0:
            raise ValueError(f"session_ttl_s must be > 0, got {self.session_ttl_s}")

    @classmethod
    def from_file(cls, path: Path | str) -> "ServiceConfig":
        """Load a JSON config file; TAGTOUR_LISTEN=host:port overrides listen."""
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if "corpus_path" not in payload:
            raise ValueError("config file must set corpus_path")

        pipeline_keys = {f.name for f in fields(PipelineParams)}
        spot_keys = {f.name for f in fields(SpotParams)}
        pipeline = PipelineParams(
            **{k: v for k, v in payload.items() if k in pipeline_keys}
        )
        spot_params = SpotParams(**{k: v for k, v in payload.items() if k in spot_keys})

        config = cls(
            corpus_path=Path(payload["corpus_path"]),
            pipeline=pipeline,
            spots=spot_params,
            provider=payload.get("provider", "fixture"),
            provider_data=Path(payload["provider_data"]) if payload.get("provider_data") else None,
            provider_mode=payload.get("provider_mode", "photo_search"),
            ranking_mode=payload.get("ranking_mode"),
            host=payload.get("host", "127.0.0.1"),
            port=int(payload.get("port", 8000)),
            session_ttl_s=float(payload.get("session_ttl_s", 3600.0)),
        )
        listen = os.environ.get(LISTEN_ENV_VAR)
        if listen:
            host, _, port = listen.rpartition(":")
            if not host or not port.isdigit():
                raise ValueError(f"{LISTEN_ENV_VAR} must look like host:port, got {listen!r}")
            config.host = host
            config.port = int(port)
        config.validate()
        return config
