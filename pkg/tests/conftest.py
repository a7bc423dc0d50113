from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from egoalign.synth import Scenario, generate_session

DATA = Path(__file__).parent / "data"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def android_log_text() -> str:
    return (DATA / "android_log.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def headset_log_text() -> str:
    return (DATA / "headset_log.txt").read_text(encoding="utf-8")


def make_log_folder(root: Path, log_text: str, files=()) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "log.txt").write_text(log_text, encoding="utf-8")
    for name in files:
        (root / name).write_bytes(b"")
    return root


@pytest.fixture
def android_log_dir(tmp_path, android_log_text) -> Path:
    return make_log_folder(tmp_path / "20260511_162515", android_log_text,
                           ("internal.mp4", "usb1.mp4", "usb2.mp4"))


@pytest.fixture
def headset_log_dir(tmp_path, headset_log_text) -> Path:
    return make_log_folder(tmp_path / "20260512_044648", headset_log_text,
                           ("internal.mp4", "usb1.mp4", "usb2.mp4"))


@pytest.fixture(scope="session")
def pico_session(tmp_path_factory):
    out = tmp_path_factory.mktemp("pico")
    gt = generate_session(Scenario("pico4ultra", duration_s=4.0, seed=11), out)
    return out, gt


@pytest.fixture(scope="session")
def android_session(tmp_path_factory):
    out = tmp_path_factory.mktemp("android")
    gt = generate_session(Scenario("android", duration_s=10.0, seed=5), out)
    return out, gt


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
