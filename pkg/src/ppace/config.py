"""Layered run configuration: config file < environment < flags.

The YAML config file declares endpoint definitions by role plus pipeline
defaults; ``PPACE_*`` environment variables override the file and CLI flags
override everything. A built-in ``mock`` endpoint (deterministic, seeded from
the run seed) exists even with no config file, so offline runs work out of
the box. Auth tokens are referenced by environment-variable name only and
never appear in config snapshots or manifests.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from urllib.parse import quote

import yaml

from .errors import PpaceError
from .gateway import EndpointConfig, RetryPolicy


class ConfigInvalidError(PpaceError):
    pass


class UnknownEndpointError(PpaceError):
    pass


@dataclass(frozen=True)
class RunConfig:
    store_dir: Path = Path("store")
    out_dir: Path = Path("out")
    seed: int = 0
    abstract_cap: int = 512
    parser_mode: str = "lenient"
    prompt_variant: str = "fewshot"
    required_reviews: int = 2
    resolvers: tuple[str, ...] = ()
    taxonomy_path: str | None = None
    endpoints: dict = field(default_factory=dict)

    @property
    def corpus_path(self) -> Path:
        return self.store_dir / "corpus.jsonl"

    @property
    def reviews_path(self) -> Path:
        return self.store_dir / "reviews.jsonl"

    def snapshot(self) -> dict:
        """JSON-safe view for manifests; carries no secrets (auth by env name)."""
        return {
            "store_dir": str(self.store_dir),
            "out_dir": str(self.out_dir),
            "seed": self.seed,
            "abstract_cap": self.abstract_cap,
            "parser_mode": self.parser_mode,
            "prompt_variant": self.prompt_variant,
            "required_reviews": self.required_reviews,
            "resolvers": list(self.resolvers),
            "taxonomy_path": self.taxonomy_path,
            "endpoints": self.endpoints,
        }


_ENV_KEYS = {
    "PPACE_STORE": ("store_dir", Path),
    "PPACE_OUT": ("out_dir", Path),
    "PPACE_SEED": ("seed", int),
    "PPACE_ABSTRACT_CAP": ("abstract_cap", int),
    "PPACE_PARSER_MODE": ("parser_mode", str),
    "PPACE_PROMPT_VARIANT": ("prompt_variant", str),
    "PPACE_REQUIRED_REVIEWS": ("required_reviews", int),
    "PPACE_TAXONOMY": ("taxonomy_path", str),
}


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    cfg = RunConfig()

    file_path = path or os.environ.get("PPACE_CONFIG")
    if file_path:
        try:
            raw = yaml.safe_load(Path(file_path).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigInvalidError(f"{file_path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigInvalidError(f"{file_path}: top level must be a mapping")
        updates = {}
        for key in (
            "seed", "abstract_cap", "parser_mode", "prompt_variant",
            "required_reviews", "taxonomy_path", "endpoints",
        ):
            if key in raw:
                updates[key] = raw[key]
        if "store" in raw:
            updates["store_dir"] = Path(raw["store"])
        if "out" in raw:
            updates["out_dir"] = Path(raw["out"])
        if "resolvers" in raw:
            updates["resolvers"] = tuple(raw["resolvers"])
        try:
            cfg = replace(cfg, **updates)
        except TypeError as exc:
            raise ConfigInvalidError(str(exc)) from exc

    for env_key, (attr, cast) in _ENV_KEYS.items():
        value = os.environ.get(env_key)
        if value:
            try:
                cfg = replace(cfg, **{attr: cast(value)})
            except ValueError as exc:
                raise ConfigInvalidError(f"{env_key}={value!r}: {exc}") from exc

    if overrides:
        clean = {k: v for k, v in overrides.items() if v is not None}
        if "store_dir" in clean:
            clean["store_dir"] = Path(clean["store_dir"])
        if "out_dir" in clean:
            clean["out_dir"] = Path(clean["out_dir"])
        if "resolvers" in clean:
            clean["resolvers"] = tuple(clean["resolvers"])
        cfg = replace(cfg, **clean)

    if cfg.parser_mode not in ("strict", "lenient"):
        raise ConfigInvalidError(f"parser_mode must be strict or lenient, got {cfg.parser_mode!r}")
    if cfg.prompt_variant not in ("fewshot", "finetune"):
        raise ConfigInvalidError(f"prompt_variant must be fewshot or finetune")
    return cfg


def endpoint_config(cfg: RunConfig, name: str) -> EndpointConfig:
    """Resolve an endpoint role; 'mock' is built in and seeded from the run seed."""
    entry = dict(cfg.endpoints.get(name, {}))
    if not entry:
        if name == "mock":
            entry = {"base_url": "mock://local", "model": "mock-model"}
        else:
            raise UnknownEndpointError(f"endpoint {name!r} is not defined in the config")

    base_url = entry.get("base_url", "")
    if not base_url:
        raise ConfigInvalidError(f"endpoint {name!r} has no base_url")
    if base_url.startswith("mock:"):
        params = [("seed", str(entry.get("seed", cfg.seed)))]
        if entry.get("table"):
            params.append(("table", str(entry["table"])))
        query = "&".join(f"{k}={quote(v, safe='/')}" for k, v in params)
        base_url = base_url.split("?")[0] + "?" + query

    retry_entry = entry.get("retry", {})
    return EndpointConfig(
        base_url=base_url,
        model_name=entry.get("model", name),
        auth_env=entry.get("auth_env"),
        gen_params=dict(entry.get("gen_params", {})),
        max_in_flight=int(entry.get("max_in_flight", 4)),
        retry=RetryPolicy(
            max_attempts=int(retry_entry.get("max_attempts", 4)),
            backoff_base=float(retry_entry.get("backoff_base", 1.0)),
            backoff_factor=float(retry_entry.get("backoff_factor", 2.0)),
            jitter=float(retry_entry.get("jitter", 0.2)),
        ),
        timeout=float(entry.get("timeout", 30.0)),
    )


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: str | Path, command: str, cfg: RunConfig,
                   inputs: dict[str, str | Path], extra: dict | None = None) -> Path:
    """Reproducibility manifest: config snapshot, seeds, and input digests.

    Deliberately timestamp-free so identical runs produce identical manifests.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config": cfg.snapshot(),
        "seed": cfg.seed,
        "inputs": {
            name: {"path": str(p), "sha256": file_digest(p)}
            for name, p in sorted(inputs.items())
            if Path(p).exists()
        },
    }
    if extra:
        manifest.update(extra)
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path
