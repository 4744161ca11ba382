"""Spans and trace-aware log lines for lab runs.

Every operation opens a span named ``hardy_lab.<operation>`` through
:func:`lab_span`; its inputs and verdicts become ``hardy_lab.*`` span
attributes. Spans go wherever the installed ``TracerProvider`` sends them.

A :class:`TelemetryConfig` on :class:`hardy_lab.HardyLabServer` (or
``--trace-context`` on the CLI) additionally appends trace ids to
``HardyLab.*`` log lines. Only a config with ``record_sensitive_data`` puts
exception messages on failing spans: they often quote sample coordinates.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Mapping
from contextlib import contextmanager
from dataclasses import dataclass
from numbers import Integral, Real

import numpy as np
from fastmcp.server.dependencies import get_server
from fastmcp.telemetry import get_tracer
from opentelemetry import trace
from opentelemetry.trace import Span, Status, StatusCode, Tracer
from opentelemetry.util.types import AttributeValue

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
SPAN_PREFIX = "hardy_lab"
LAB_LOGGER = "HardyLab"


@dataclass(frozen=True)
class TelemetryConfig:
    """Opt-in telemetry policy of a server or CLI run."""

    record_sensitive_data: bool = False
    log_trace_context: bool = True


TELEMETRY_DISABLED = TelemetryConfig(
    record_sensitive_data=False,
    log_trace_context=False,
)


def get_telemetry_config() -> TelemetryConfig:
    """Config of the active ``HardyLabServer``; disabled outside one."""
    try:
        server = get_server()
    except RuntimeError:
        return TELEMETRY_DISABLED
    config = getattr(server, "telemetry", None)
    if isinstance(config, TelemetryConfig):
        return config
    return TELEMETRY_DISABLED


def _attribute(value: object) -> AttributeValue:
    # numpy scalars are not ``int`` or ``bool`` and would be dropped
    if isinstance(value, bool | np.bool_):
        return bool(value)
    if isinstance(value, str):
        return value
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, Real):
        return float(value)
    return str(value)


def lab_attributes(**values: object) -> dict[str, AttributeValue]:
    """``hardy_lab.``-prefixed span attributes; ``None`` values are left
    out and NaN becomes the string ``"nan"``."""
    out: dict[str, AttributeValue] = {}
    for key, value in values.items():
        if value is None:
            continue
        value = _attribute(value)
        if isinstance(value, float) and math.isnan(value):
            value = "nan"
        out[f"{SPAN_PREFIX}.{key}"] = value
    return out


def record_outcome(span: Span, **values: object) -> None:
    """Attach verdict attributes to an open span."""
    span.set_attributes(lab_attributes(**values))


@contextmanager
def traced_span(
    name: str,
    *,
    record_exception_details: bool | None = None,
    attributes: Mapping[str, AttributeValue] | None = None,
    tracer: Tracer | None = None,
) -> Iterator[Span]:
    """Open a span that marks failures with the exception class.

    The message and stack go on the span only when
    ``record_exception_details`` is true; ``None`` follows the active
    server's ``record_sensitive_data``.
    """
    if record_exception_details is None:
        record_exception_details = get_telemetry_config().record_sensitive_data

    t = tracer or get_tracer()
    with t.start_as_current_span(
        name,
        record_exception=False,
        set_status_on_exception=False,
        attributes=attributes,
    ) as span:
        try:
            yield span
        except BaseException as exc:
            span.set_attribute("error.type", type(exc).__name__)
            if record_exception_details:
                span.record_exception(exc)
                span.set_status(Status(StatusCode.ERROR, str(exc)))
            else:
                span.set_status(Status(StatusCode.ERROR, type(exc).__name__))
            raise


@contextmanager
def lab_span(
    operation: str, *, tracer: Tracer | None = None, **values: object
) -> Iterator[Span]:
    """Span ``hardy_lab.<operation>`` carrying ``values`` as attributes."""
    with traced_span(
        f"{SPAN_PREFIX}.{operation}",
        attributes=lab_attributes(**values),
        tracer=tracer,
    ) as span:
        yield span


class TraceContextFormatter(logging.Formatter):
    """Append trace and span IDs while a recording span is current."""

    def format(self, record: logging.LogRecord) -> str:
        base = super().format(record)
        try:
            ctx = trace.get_current_span().get_span_context()
            if ctx.is_valid:
                return (
                    f"{base} [trace_id={ctx.trace_id:032x} "
                    f"span_id={ctx.span_id:016x}]"
                )
        except Exception:
            pass
        return base


def attach_trace_context_formatter(
    logger: logging.Logger | None = None,
) -> None:
    """Give ``logger`` (``HardyLab`` by default) one trace-aware handler."""
    logger = logger or logging.getLogger(LAB_LOGGER)
    for handler in logger.handlers:
        if isinstance(handler.formatter, TraceContextFormatter):
            return
    handler = logging.StreamHandler()
    handler.setFormatter(TraceContextFormatter(LOG_FORMAT))
    logger.addHandler(handler)


__all__ = [
    "LOG_FORMAT",
    "TELEMETRY_DISABLED",
    "TelemetryConfig",
    "TraceContextFormatter",
    "attach_trace_context_formatter",
    "get_telemetry_config",
    "get_tracer",
    "lab_attributes",
    "lab_span",
    "record_outcome",
    "traced_span",
]
