"""Abstraction sources: mock crowd classifier, VLM HTTP client, log replay.

Every source answers ``classify(pose, heading) -> AbstractLabel`` with one
of exactly two labels, or raises. The mock reproduces the field behavior of
a forward camera (far -> free, near -> crowd, passed -> free) with an
optional seeded label-flip noise model for unstable recognition; the VLM
client speaks the OpenAI-compatible chat-completions wire format.
"""

from __future__ import annotations

import base64
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
import requests

from .errors import (
    AuthError,
    MalformedResponseError,
    NoMatchingObservationError,
    TransportError,
)
from .grid import WorldPoint
from .observation import AbstractLabel, Observation, Source

DEFAULT_DETECT_RANGE = 8.0  # meters
DEFAULT_FOV_HALF_ANGLE = math.radians(60.0)
DEFAULT_MATCH_RADIUS = 0.5  # meters

ENV_API_KEY = "AMG_VLM_API_KEY"
ENV_ENDPOINT = "AMG_VLM_ENDPOINT"

DEFAULT_PROMPT = (
    "You are an expert on robot drivability. The given image was taken by a "
    "camera placed in front of the robot. Analyze if there are any crowds in "
    "this image that would be an obstacle to the robot's traveling. If a crowd "
    'is determined to be present, return "crowd"; otherwise, return "free".'
)


def parse_label_text(text: str) -> AbstractLabel:
    """Strict two-token parse of a model response (trimmed, case-folded)."""
    token = text.strip().lower()
    if token == "crowd":
        return AbstractLabel.CROWD
    if token == "free":
        return AbstractLabel.FREE
    raise MalformedResponseError(f"expected 'crowd' or 'free', got {text!r}")


@dataclass(frozen=True)
class CrowdDisc:
    """Ground-truth crowd region for the mock classifier."""

    center: WorldPoint
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"disc radius must be > 0, got {self.radius}")


def _wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    return a - 2.0 * math.pi * math.floor((a + math.pi) / (2.0 * math.pi))


@dataclass(frozen=True)
class MockCrowdClassifier:
    """Range-and-cone crowd detector over ground-truth discs.

    A pose sees a crowd iff some disc center lies within ``detect_range`` of
    the pose and within +-``fov_half_angle`` of the heading. With
    ``flip_probability`` > 0 the label is flipped pseudo-randomly, keyed by
    (seed, pose quantized to 1 mm), so identical poses always flip the same
    way regardless of call order.
    """

    crowd_discs: tuple[CrowdDisc, ...] = ()
    detect_range: float = DEFAULT_DETECT_RANGE
    fov_half_angle: float = DEFAULT_FOV_HALF_ANGLE
    flip_probability: float = 0.0
    rng_seed: int = 0

    source = Source.MOCK

    def __post_init__(self):
        object.__setattr__(self, "crowd_discs", tuple(self.crowd_discs))
        if self.detect_range < 0:
            raise ValueError(f"detect_range must be >= 0, got {self.detect_range}")
        if not 0.0 <= self.flip_probability <= 1.0:
            raise ValueError(f"flip_probability must be in [0, 1], got {self.flip_probability}")

    def _sees_crowd(self, pose: WorldPoint, heading: float) -> bool:
        for disc in self.crowd_discs:
            dist = pose.distance_to(disc.center)
            if dist > self.detect_range:
                continue
            if dist <= 1e-12:
                return True  # coincident center: angle defined as 0
            angle = math.atan2(disc.center.y - pose.y, disc.center.x - pose.x)
            if abs(_wrap_angle(angle - heading)) <= self.fov_half_angle:
                return True
        return False

    def _flip(self, pose: WorldPoint) -> bool:
        if self.flip_probability <= 0.0:
            return False
        qx = int(round(pose.x * 1000.0)) & 0xFFFFFFFFFFFFFFFF
        qy = int(round(pose.y * 1000.0)) & 0xFFFFFFFFFFFFFFFF
        seed = int(self.rng_seed) & 0xFFFFFFFFFFFFFFFF
        rng = np.random.default_rng(np.random.SeedSequence([seed, qx, qy]))
        return bool(rng.random() < self.flip_probability)

    def classify(self, pose: WorldPoint, heading: float) -> AbstractLabel:
        label = AbstractLabel.CROWD if self._sees_crowd(pose, heading) else AbstractLabel.FREE
        if self._flip(pose):
            label = AbstractLabel.FREE if label is AbstractLabel.CROWD else AbstractLabel.CROWD
        return label


@dataclass
class VlmClassifier:
    """OpenAI-compatible chat-completions client for image classification.

    The endpoint and bearer token come from AMG_VLM_ENDPOINT and
    AMG_VLM_API_KEY unless given explicitly. Transport failures are retried
    with exponential backoff (base 1 s, factor 2); a response that is not
    exactly one of the two tokens is never retried or coerced.
    """

    endpoint_url: str
    model_name: str = "gpt-4o-mini"
    api_key: str | None = field(default=None, repr=False)
    prompt_text: str = DEFAULT_PROMPT
    timeout: float = 30.0
    max_retries: int = 2
    backoff_base: float = 1.0
    image_provider: object = field(default=None, repr=False)  # (pose, heading) -> bytes
    image_mime: str = "image/jpeg"

    source = Source.VLM

    def __post_init__(self):
        if not self.prompt_text:
            raise ValueError("prompt_text must be nonempty")
        if not self.endpoint_url:
            raise ValueError(f"endpoint required (flag or {ENV_ENDPOINT})")
        self.last_raw_response: str | None = None

    def _request_body(self, image: bytes) -> dict:
        data_url = f"data:{self.image_mime};base64,{base64.b64encode(image).decode('ascii')}"
        return {
            "model": self.model_name,
            "messages": [
                {
                    "role": "user",
                    "content": [
                        {"type": "text", "text": self.prompt_text},
                        {"type": "image_url", "image_url": {"url": data_url}},
                    ],
                }
            ],
        }

    def classify_image(self, image: bytes) -> AbstractLabel:
        """One chat-completion round trip for one image."""
        if not image:
            raise ValueError("image must be nonempty")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = self._request_body(image)

        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt > 0:
                time.sleep(self.backoff_base * 2.0 ** (attempt - 1))
            try:
                resp = requests.post(
                    self.endpoint_url, json=body, headers=headers, timeout=self.timeout
                )
            except requests.RequestException as e:
                last_error = e
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials (HTTP {resp.status_code})")
            if 500 <= resp.status_code < 600:
                last_error = TransportError(f"HTTP {resp.status_code} from endpoint")
                continue
            if resp.status_code != 200:
                raise TransportError(f"HTTP {resp.status_code} from endpoint")
            self.last_raw_response = resp.text
            return self._parse_response(resp.text)
        raise TransportError(
            f"request failed after {self.max_retries + 1} attempts: {last_error}"
        )

    @staticmethod
    def _parse_response(text: str) -> AbstractLabel:
        try:
            payload = json.loads(text)
            content = payload["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as e:
            raise MalformedResponseError(f"unparseable chat-completion response: {e}") from e
        if not isinstance(content, str):
            raise MalformedResponseError(f"message content is not text: {content!r}")
        return parse_label_text(content)

    def classify(self, pose: WorldPoint, heading: float) -> AbstractLabel:
        if self.image_provider is None:
            raise TransportError("VlmClassifier.classify needs an image_provider")
        image = self.image_provider(pose, heading)
        return self.classify_image(image)


@dataclass(frozen=True)
class ReplayClassifier:
    """Replays labels from a recorded observation log by nearest position."""

    log: tuple[Observation, ...]
    match_radius: float = DEFAULT_MATCH_RADIUS

    source = Source.FILE

    def __post_init__(self):
        object.__setattr__(self, "log", tuple(self.log))
        if self.match_radius <= 0:
            raise ValueError(f"match_radius must be > 0, got {self.match_radius}")

    def classify(self, pose: WorldPoint, heading: float = 0.0) -> AbstractLabel:
        best: Observation | None = None
        best_dist = math.inf
        for obs in self.log:
            d = pose.distance_to(obs.position)
            if d > self.match_radius:
                continue
            # Nearest wins; exact distance ties go to the earliest timestamp.
            if d < best_dist or (d == best_dist and best is not None and obs.timestamp < best.timestamp):
                best = obs
                best_dist = d
        if best is None:
            raise NoMatchingObservationError(
                f"no recorded observation within {self.match_radius} m of "
                f"({pose.x}, {pose.y})"
            )
        return best.label
