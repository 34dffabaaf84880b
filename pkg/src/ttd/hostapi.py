"""Names shared between the guest parser and the host world.

Host-call names are reserved in the guest language: they always denote the
host interface and cannot be shadowed by guest bindings.
"""

HOST_CALL_KINDS = (
    "random",
    "date_now",
    "set_timeout",
    "set_interval",
    "clear_timer",
    "create_element",
    "append_child",
    "remove_child",
    "set_attribute",
    "get_attribute",
    "query_node",
    "add_event_listener",
    "remove_event_listener",
    "xhr_open",
    "xhr_send",
    "xhr_status",
    "xhr_response",
    "storage_get",
    "storage_set",
    "storage_remove",
    "console_log",
)

# Pure, host-free utilities. They never touch host state and are not host
# interactions, so they leave no mark in the nondeterminism log.
BUILTIN_NAMES = ("len", "push", "keys", "str", "floor")

# Host calls whose return value is recorded as a Simple log entry. Everything
# else is deterministic given world state (PRNG state lives in checkpoints).
SIMPLE_LOGGED_KINDS = ("date_now", "set_timeout", "set_interval")
