"""
Pytest configuration and shared fixtures.

Provides small images, action spaces, cameras and a synthetic evaluation
manifest for the PIVOT test suite.
"""

import json

import numpy as np
import pytest


# ==================== Images ====================

@pytest.fixture
def blank_image():
    """Uniform gray 480x640 RGB frame."""
    return np.full((480, 640, 3), 128, dtype=np.uint8)


@pytest.fixture
def small_image():
    """Uniform gray 120x160 RGB frame."""
    return np.full((120, 160, 3), 128, dtype=np.uint8)


# ==================== Action Spaces ====================

@pytest.fixture
def nav2d_spec():
    """Image-space navigation over a 640x480 frame."""
    from src.action_space import ActionSpaceSpec

    return ActionSpaceSpec(kind="nav2d", lower=(0.0, 0.0), upper=(639.0, 479.0))


@pytest.fixture
def keypoint_spec():
    """Keypoint selection over a 640x480 frame."""
    from src.action_space import ActionSpaceSpec

    return ActionSpaceSpec(kind="keypoint2d", lower=(0.0, 0.0), upper=(639.0, 479.0))


@pytest.fixture
def cart3d_spec():
    """End-effector deltas of up to 20 cm with colour-coded height."""
    from src.action_space import ActionSpaceSpec

    return ActionSpaceSpec(
        kind="cart3d",
        lower=(-0.2, -0.2, -0.2),
        upper=(0.2, 0.2, 0.2),
        ee_position=(0.0, 0.0, 1.0),
    )


@pytest.fixture
def camera():
    """Pinhole camera with identity extrinsic over a 640x480 frame."""
    from src.action_space import CameraModel

    return CameraModel(fx=500.0, fy=500.0, cx=320.0, cy=240.0, image_w=640, image_h=480)


@pytest.fixture
def world_config():
    """Obstacle-free world three meters from the target."""
    from src.models.config import WorldConfig

    return WorldConfig(agent=[0.0, -3.0], target=[0.0, 0.0], budget=10)


# ==================== Evaluation Data ====================

@pytest.fixture
def nav_manifest(tmp_path):
    """
    Twenty-record pixel-truth manifest over blank PNG frames.

    Returns the manifest path; images live next to it.
    """
    import cv2

    rng = np.random.default_rng(1234)
    image = np.full((480, 640, 3), 128, dtype=np.uint8)
    lines = []
    for i in range(20):
        name = f"frame_{i:02d}.png"
        cv2.imwrite(str(tmp_path / name), image)
        truth = [float(rng.uniform(50, 590)), float(rng.uniform(50, 430))]
        lines.append(
            json.dumps(
                {
                    "id": f"nav-{i:02d}",
                    "image": name,
                    "instruction": "go to the door",
                    "category": "near" if i % 2 == 0 else "far",
                    "truth_kind": "pixel",
                    "truth": truth,
                }
            )
        )
    manifest = tmp_path / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


# ==================== Observability ====================

@pytest.fixture
def metrics():
    """Fresh in-memory metrics collector installed as the global one."""
    from src.observability.metrics import MetricsConfig, setup_metrics

    collector = setup_metrics(MetricsConfig(enabled=False))
    collector.reset()
    return collector


# ==================== Environment Setup ====================

@pytest.fixture(autouse=True)
def setup_test_env(monkeypatch):
    """Set up test environment variables."""
    for name in ("PIVOT_SEED", "PIVOT_JOBS", "PIVOT_OUT_DIR", "PIVOT_ORACLE"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("PIVOT_LOG_LEVEL", "WARNING")

    # Clear any production credentials
    monkeypatch.delenv("OPENAI_API_KEY", raising=False)
    monkeypatch.delenv("GEMINI_API_KEY", raising=False)


@pytest.fixture(autouse=True)
def restore_structlog_config():
    """Undo per-test structlog configuration so no test keeps a closed capture stream."""
    import structlog

    saved = structlog.get_config()
    yield
    structlog.configure(**saved)
