"""Tests for hardy_lab.telemetry helpers."""

from __future__ import annotations

import logging
import math
from unittest.mock import patch

import numpy as np
import pytest
from opentelemetry import trace
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import SimpleSpanProcessor
from opentelemetry.sdk.trace.export.in_memory_span_exporter import (
    InMemorySpanExporter,
)
from opentelemetry.trace import StatusCode

from hardy_lab import HardyLabServer, TelemetryConfig, get_telemetry_config
from hardy_lab.cli import main
from hardy_lab.domains import Disc
from hardy_lab.errors import OnRidgeError
from hardy_lab.geometry import geometry_check
from hardy_lab.inequalities import ConvexImproved
from hardy_lab.profiles import Band, SmoothBump
from hardy_lab.quadrature import QuadratureSpec
from hardy_lab.telemetry import (
    TraceContextFormatter,
    attach_trace_context_formatter,
    lab_attributes,
    lab_span,
    traced_span,
)
from hardy_lab.verifier import verify


@pytest.fixture
def memory_exporter() -> InMemorySpanExporter:
    return InMemorySpanExporter()


@pytest.fixture
def test_tracer(memory_exporter: InMemorySpanExporter) -> trace.Tracer:
    provider = TracerProvider()
    provider.add_span_processor(SimpleSpanProcessor(memory_exporter))
    return provider.get_tracer("test")


@pytest.fixture
def lab_tracer(test_tracer: trace.Tracer):
    """Route spans opened inside the lab to the in-memory exporter."""
    with patch("hardy_lab.telemetry.get_tracer", return_value=test_tracer):
        yield test_tracer


@pytest.fixture
def lab_logger():
    logger = logging.getLogger("HardyLab")
    saved = list(logger.handlers)
    logger.handlers = []
    yield logger
    logger.handlers = saved


def _exception_messages(span) -> list[str]:
    messages: list[str] = []
    for event in span.events:
        attrs = event.attributes or {}
        if "exception.message" in attrs:
            messages.append(str(attrs["exception.message"]))
    return messages


def _has_trace_formatter(logger: logging.Logger) -> bool:
    return any(
        isinstance(h.formatter, TraceContextFormatter) for h in logger.handlers
    )


def _span(exporter: InMemorySpanExporter, name: str):
    (span,) = [s for s in exporter.get_finished_spans() if s.name == name]
    return span


def test_lab_attributes_are_prefixed_and_plain():
    attributes = lab_attributes(
        domain="disc",
        resolution=np.int64(256),
        ratio=np.float64(1.5),
        passed=True,
        scheme=None,
        min_weight=math.nan,
    )
    assert attributes == {
        "hardy_lab.domain": "disc",
        "hardy_lab.resolution": 256,
        "hardy_lab.ratio": 1.5,
        "hardy_lab.passed": True,
        "hardy_lab.min_weight": "nan",
    }
    assert type(attributes["hardy_lab.resolution"]) is int


def test_lab_span_names_the_operation(
    test_tracer: trace.Tracer,
    memory_exporter: InMemorySpanExporter,
) -> None:
    with lab_span("verify", tracer=test_tracer, domain="torus", p=3.0):
        pass

    span = _span(memory_exporter, "hardy_lab.verify")
    assert span.attributes["hardy_lab.domain"] == "torus"
    assert span.attributes["hardy_lab.p"] == 3.0


def test_verify_records_its_inputs_and_verdict(
    lab_tracer: trace.Tracer,
    memory_exporter: InMemorySpanExporter,
) -> None:
    report = verify(
        ConvexImproved(),
        Disc(R=1),
        2,
        SmoothBump(),
        Band(a=0.1, b=0.6),
        QuadratureSpec(),
    )

    attributes = _span(memory_exporter, "hardy_lab.verify").attributes
    assert attributes["hardy_lab.domain"] == "disc"
    assert attributes["hardy_lab.inequality"] == "convex-improved"
    assert attributes["hardy_lab.ratio"] == pytest.approx(report.ratio)
    assert attributes["hardy_lab.passed"] is bool(report.passed)


def test_geometry_check_records_the_convergence_ratio(
    lab_tracer: trace.Tracer,
    memory_exporter: InMemorySpanExporter,
) -> None:
    report = geometry_check(Disc(R=1), samples=50, seed=2)

    span = _span(memory_exporter, "hardy_lab.geometry_check")
    attributes = span.attributes
    assert attributes["hardy_lab.samples"] == 50
    assert attributes["hardy_lab.seed"] == 2
    assert attributes["hardy_lab.passed"] is bool(report.passed)
    assert attributes["hardy_lab.convergence_ratio"] == pytest.approx(
        report.convergence_ratio
    )


def test_failing_span_keeps_coordinates_off_by_default(
    test_tracer: trace.Tracer,
    memory_exporter: InMemorySpanExporter,
) -> None:
    with pytest.raises(OnRidgeError, match="0.0"):
        with lab_span("verify", tracer=test_tracer):
            raise OnRidgeError("x=(0.0, 0.0) is on the ridge")

    span = _span(memory_exporter, "hardy_lab.verify")
    assert span.status.status_code == StatusCode.ERROR
    assert span.status.description == "OnRidgeError"
    assert span.attributes["error.type"] == "OnRidgeError"
    assert _exception_messages(span) == []


def test_failing_span_records_details_when_enabled(
    test_tracer: trace.Tracer,
    memory_exporter: InMemorySpanExporter,
) -> None:
    with pytest.raises(OnRidgeError):
        with traced_span(
            "hardy_lab.verify",
            record_exception_details=True,
            tracer=test_tracer,
        ):
            raise OnRidgeError("x=(0.0, 0.0) is on the ridge")

    span = _span(memory_exporter, "hardy_lab.verify")
    assert span.status.description == "x=(0.0, 0.0) is on the ridge"
    assert "x=(0.0, 0.0) is on the ridge" in _exception_messages(span)


def test_failing_span_follows_the_active_server(
    test_tracer: trace.Tracer,
    memory_exporter: InMemorySpanExporter,
) -> None:
    server = HardyLabServer(
        name="t-sensitive",
        telemetry=TelemetryConfig(record_sensitive_data=True),
    )

    with patch("hardy_lab.telemetry.get_server", return_value=server):
        with pytest.raises(RuntimeError, match="boom"):
            with lab_span("sweep", tracer=test_tracer):
                raise RuntimeError("boom")

    span = _span(memory_exporter, "hardy_lab.sweep")
    assert span.status.description == "boom"


def test_telemetry_is_disabled_outside_a_server() -> None:
    with patch(
        "hardy_lab.telemetry.get_server",
        side_effect=RuntimeError("No FastMCP server instance in context"),
    ):
        config = get_telemetry_config()
    assert config.record_sensitive_data is False
    assert config.log_trace_context is False


def test_trace_context_formatter_appends_ids(
    test_tracer: trace.Tracer,
) -> None:
    formatter = TraceContextFormatter("%(message)s")
    record = logging.LogRecord(
        name="HardyLab.Verifier",
        level=logging.INFO,
        pathname="",
        lineno=0,
        msg="ratio=1.02",
        args=(),
        exc_info=None,
    )

    assert formatter.format(record) == "ratio=1.02"

    with test_tracer.start_as_current_span("hardy_lab.verify"):
        formatted = formatter.format(record)
    assert formatted.startswith("ratio=1.02 [trace_id=")
    assert "span_id=" in formatted


def test_formatter_is_attached_once(lab_logger: logging.Logger) -> None:
    attach_trace_context_formatter()
    HardyLabServer(name="t-once", telemetry=TelemetryConfig())
    assert len(lab_logger.handlers) == 1
    assert _has_trace_formatter(lab_logger)


@pytest.mark.parametrize(
    ("telemetry", "attached"),
    [
        (None, False),
        (TelemetryConfig(), True),
        (TelemetryConfig(log_trace_context=False), False),
    ],
)
def test_server_attaches_formatter_only_when_opted_in(
    lab_logger: logging.Logger, telemetry, attached
) -> None:
    server = HardyLabServer(name="t-formatter", telemetry=telemetry)
    assert _has_trace_formatter(lab_logger) is attached
    assert isinstance(server.telemetry, TelemetryConfig)


def test_cli_trace_context_flag_attaches_formatter(
    lab_logger: logging.Logger, tmp_path
) -> None:
    out = tmp_path / "geometry.json"
    args = [
        "geometry-check",
        "--domain",
        "disc:R=1",
        "--samples",
        "50",
        "--out",
        str(out),
    ]
    assert main(args) == 0
    assert not _has_trace_formatter(lab_logger)
    assert main([*args, "--trace-context"]) == 0
    assert _has_trace_formatter(lab_logger)


def test_cli_run_is_one_span(
    lab_tracer: trace.Tracer,
    memory_exporter: InMemorySpanExporter,
    tmp_path,
) -> None:
    out = tmp_path / "geometry.json"
    args = ["geometry-check", "--domain", "disc:R=1", "--samples", "50"]
    assert main([*args, "--out", str(out)]) == 0

    run = _span(memory_exporter, "hardy_lab.run")
    check = _span(memory_exporter, "hardy_lab.geometry_check")
    assert run.attributes["hardy_lab.command"] == "geometry-check"
    assert run.attributes["hardy_lab.passed"] is True
    assert check.parent.span_id == run.context.span_id
