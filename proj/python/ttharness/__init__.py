"""Python bindings for the self-directed Turing test harness."""

from ._ttharness import (
    Dialogue,
    DialogueMode,
    Error,
    Message,
    Origin,
    Role,
    count_turns,
    format_percent,
    generate_pseudo_dialogue,
    last_turns,
    machine_first_orders,
    parse_topic_list,
    parse_transcript,
    parse_verdict,
    pass_rate,
    render_report,
    render_transcript,
    sample_send_delays,
    to_ping_pong,
)

__all__ = [
    "Dialogue",
    "DialogueMode",
    "Error",
    "Message",
    "Origin",
    "Role",
    "count_turns",
    "format_percent",
    "generate_pseudo_dialogue",
    "last_turns",
    "machine_first_orders",
    "parse_topic_list",
    "parse_transcript",
    "parse_verdict",
    "pass_rate",
    "render_report",
    "render_transcript",
    "sample_send_delays",
    "to_ping_pong",
]
