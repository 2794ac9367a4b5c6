"""Spatial caption generation.

Captions gain a direction phrase either through an external chat-completion
service (temperature 0.2) or through a deterministic offline template. The
offline path is the default and keeps dataset builds reproducible; the
service client is strictly optional.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import EmptyCaptionError, LlmUnavailableError, MalformedResponseError
from .geometry import DirectionClass

log = logging.getLogger(__name__)

PROMPT_TEMPLATE = (
    "The sound: {caption} is coming from the {direction}. Rephrase the "
    "sentence in English to concisely describe the sound detail and the "
    "direction of its source."
)
FALLBACK_TEMPLATE = "The sound of {caption}, coming from the {direction}."
ZERO_SHOT_TEMPLATE = "The sound is coming from the {direction}."


@dataclass(frozen=True)
class SpatialCaptionPair:
    caption: str
    direction: DirectionClass
    spatial_caption: str
    provenance: str  # "llm" or "template"


@dataclass
class LlmConfig:
    """Chat-completion client settings; ``endpoint=None`` means offline."""

    endpoint: str | None = None
    model: str = "llama-3.2-3b"
    temperature: float = 0.2
    token_env: str = "SPALIGN_LLM_TOKEN"
    timeout_s: float = 30.0
    fallback: bool = True
    max_concurrency: int = 4
    extra_headers: dict = field(default_factory=dict)


def _direction_name(direction) -> str:
    return direction.name if isinstance(direction, DirectionClass) else str(direction)


def build_prompt(caption: str, direction) -> str:
    """The exact rephrasing prompt sent to the caption service."""
    if not caption:
        raise EmptyCaptionError("caption must be nonempty")
    return PROMPT_TEMPLATE.format(caption=caption, direction=_direction_name(direction))


def fallback_caption(caption: str, direction) -> str:
    if not caption:
        raise EmptyCaptionError("caption must be nonempty")
    return FALLBACK_TEMPLATE.format(caption=caption, direction=_direction_name(direction))


def zero_shot_caption(direction) -> str:
    """Direction-only caption used for zero-shot classification and editing."""
    return ZERO_SHOT_TEMPLATE.format(direction=_direction_name(direction))


def _post_chat(prompt: str, config: LlmConfig) -> str:
    import requests

    headers = {"Content-Type": "application/json", **config.extra_headers}
    token = os.environ.get(config.token_env, "")
    if token:
        headers["Authorization"] = f"Bearer {token}"
    payload = {
        "model": config.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
    }
    response = requests.post(config.endpoint, json=payload, headers=headers,
                             timeout=config.timeout_s)
    response.raise_for_status()
    try:
        text = response.json()["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise MalformedResponseError(f"unexpected response shape: {exc}") from exc
    if not isinstance(text, str) or not text.strip():
        raise MalformedResponseError("service returned an empty caption")
    return text.strip()


def rephrase_caption(caption: str, direction: DirectionClass,
                     config: LlmConfig | None = None) -> SpatialCaptionPair:
    """Spatially enrich one caption.

    Tries the configured service; on any failure (or with no endpoint)
    falls back to the offline template unless ``config.fallback`` is off,
    in which case the failure is raised.
    """
    config = config or LlmConfig()
    prompt = build_prompt(caption, direction)  # validates the caption
    if config.endpoint:
        try:
            text = _post_chat(prompt, config)
            return SpatialCaptionPair(caption, direction, text, "llm")
        except MalformedResponseError:
            if not config.fallback:
                raise
            log.warning("caption service returned malformed payload; using template")
        except Exception as exc:  # noqa: BLE001 - any transport failure
            if not config.fallback:
                raise LlmUnavailableError(f"caption service failed: {exc}") from exc
            log.warning("caption service unavailable (%s); using template", exc)
    elif not config.fallback:
        raise LlmUnavailableError("no endpoint configured and fallback disabled")
    return SpatialCaptionPair(caption, direction, fallback_caption(caption, direction),
                              "template")


def rephrase_many(pairs, config: LlmConfig | None = None):
    """Rephrase (caption, direction) pairs with bounded concurrency."""
    config = config or LlmConfig()
    pairs = list(pairs)
    if not config.endpoint or config.max_concurrency <= 1:
        return [rephrase_caption(c, d, config) for c, d in pairs]
    with ThreadPoolExecutor(max_workers=config.max_concurrency) as pool:
        return list(pool.map(lambda cd: rephrase_caption(cd[0], cd[1], config), pairs))
