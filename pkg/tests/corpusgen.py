"""Deterministic corpus of (program, scenario, seed) triples.

Each triple is generated from its index alone, so the corpus is stable
across runs and machines. Programs are assembled from small feature blocks
(compute loops, object builders, interval and timeout-chain timers, DOM
reads and writes, storage, XHR, scripted clicks) and the scenario is built
to match: documents exist when the program queries them, responses exist
when it fetches, inputs target real node ids.

Values flow into observable sinks (storage, console, attributes, the heap)
on purpose: replay cross-checks compare those sinks, so a corpus program
that merely computed and discarded would prove little.
"""

from __future__ import annotations

import random

CORPUS_SIZE = 200


def _compute_fn(rng: random.Random, name: str) -> str:
    k = rng.randint(3, 9)
    lim = rng.randint(10, 40)
    dec = rng.randint(3, 9)
    mul = rng.randint(2, 5)
    return (
        f"function {name}(x) {{\n"
        f"  let acc = 0;\n"
        f"  let i = 0;\n"
        f"  while (i < {k}) {{\n"
        f"    acc = acc + x * {mul} + i;\n"
        f"    if (acc > {lim}) {{\n"
        f"      acc = acc - {dec};\n"
        f"    }}\n"
        f"    i = i + 1;\n"
        f"  }}\n"
        f"  return acc;\n"
        f"}}\n"
    )


def _builder_fn(rng: random.Random, name: str) -> str:
    step = rng.randint(2, 4)
    return (
        f"function {name}(n) {{\n"
        f"  let out = [];\n"
        f"  let i = 0;\n"
        f"  while (i < n) {{\n"
        f"    push(out, {{k: i, v: i * {step}}});\n"
        f"    i = i + 1;\n"
        f"  }}\n"
        f"  return out;\n"
        f"}}\n"
    )


def _markup(rng: random.Random, anim: bool) -> tuple[str, list[str]]:
    """A small nested tree; returns (markup, node ids)."""
    ids = [f"n{i}" for i in range(rng.randint(2, 4))]
    inner = ""
    for nid in ids[1:]:
        tag = rng.choice(["p", "s", "b"])
        inner += f' [{tag} #{nid} "{nid}"]'
    anim_attr = f' anim="{rng.randint(4, 12)}"' if anim else ""
    return f'[div #{ids[0]}{anim_attr} "root"{inner}]', ids


def make_triple(index: int) -> tuple[list[tuple[str, str]], dict]:
    """Build triple ``index``; returns (scripts, scenario_raw)."""
    rng = random.Random(0xC0FFEE ^ (index * 2654435761))
    use_doc = rng.random() < 0.65
    use_inputs = use_doc and rng.random() < 0.5
    use_xhr = rng.random() < 0.35
    use_interval = rng.random() < 0.55
    use_chain = rng.random() < 0.4
    use_anim = use_doc and rng.random() < 0.4
    duration = float(rng.randint(150, 400))

    lines: list[str] = []
    lines.append(_compute_fn(rng, "calc"))
    if rng.random() < 0.6:
        lines.append(_builder_fn(rng, "build"))
        lines.append("let data = build(%d);\n" % rng.randint(3, 7))
    lines.append("let log = [];\nlet count = 0;\n")

    markup, node_ids = _markup(rng, use_anim) if use_doc else ("", [])

    if use_interval:
        period = rng.randint(20, 60)
        cap = rng.randint(2, 5)
        body = [
            "  count = count + 1;",
            "  push(log, calc(count));",
            '  storage_set("count", str(count));',
        ]
        if rng.random() < 0.5:
            body.append('  storage_set("seen", str(date_now()));')
        if use_doc and rng.random() < 0.6:
            body.append(f'  let tn = query_node("#{rng.choice(node_ids)}");')
            body.append("  if (tn != null) {")
            body.append('    set_attribute(tn, "count", str(count));')
            body.append("  }")
        if use_anim and rng.random() < 0.7:
            body.append(f'  let an = query_node("#{node_ids[0]}");')
            body.append("  if (an != null) {")
            body.append('    push(log, get_attribute(an, "frame"));')
            body.append("  }")
        body.append(f"  if (count >= {cap}) {{")
        body.append("    clear_timer(handle);")
        body.append("  }")
        lines.append("function onTick() {\n" + "\n".join(body) + "\n}\n")

    if use_chain:
        hops = rng.randint(2, 4)
        delay = rng.randint(15, 40)
        lines.append(
            "let hops = 0;\n"
            "function hop() {\n"
            "  hops = hops + 1;\n"
            "  push(log, floor(random() * 100));\n"
            f"  if (hops < {hops}) {{\n"
            f"    set_timeout(hop, {delay});\n"
            "  }\n"
            "}\n"
        )

    if use_xhr:
        lines.append(
            "function onNet(ev) {\n"
            '  if (ev.state == "DONE") {\n'
            '    storage_set("status", str(xhr_status(ev.target)));\n'
            '    storage_set("body", xhr_response(ev.target));\n'
            "  }\n"
            "}\n"
        )

    click_target = rng.choice(node_ids) if node_ids else ""
    if use_inputs:
        lines.append(
            "function onClick(ev) {\n"
            "  push(log, ev.x);\n"
            '  storage_set("clicked", str(ev.x));\n'
            "}\n"
        )
        lines.append(
            "function onParse(ev) {\n"
            f'  let c = query_node("#{click_target}");\n'
            "  if (c != null) {\n"
            f'    add_event_listener(c, "click", onClick);\n'
            "  }\n"
            "}\n"
        )

    top: list[str] = []
    top.append("push(log, calc(2));")
    if use_interval:
        top.append(f"let handle = set_interval(onTick, {period});")
    if use_chain:
        top.append(f"set_timeout(hop, {rng.randint(10, 30)});")
    if use_inputs:
        # the parse event fires on the document root node, whose id is the
        # document id; the markup's own nodes do not exist yet at toplevel
        top.append('let doc = query_node("#d0");')
        top.append("if (doc != null) {")
        top.append('  add_event_listener(doc, "parse", onParse);')
        top.append("}")
    if use_xhr:
        top.append('let req = xhr_open("GET", "/api");')
        top.append('add_event_listener(req, "readystatechange", onNet);')
        top.append("xhr_send(req);")
    top.append('console_log("done " + str(count));'
               if rng.random() < 0.5 else 'console_log("armed");')
    lines.append("\n".join(top) + "\n")

    scenario: dict = {
        "version": 1,
        "duration_ms": duration,
        "prng_seed": rng.randint(1, 10_000),
        "scheduler_seed": rng.randint(1, 10_000),
    }
    if use_doc:
        # the parse listener attaches to the root node, not the document id
        scenario["documents"] = [{"id": "d0", "markup": markup}]
    if use_inputs:
        scenario["inputs"] = [
            {"at": float(rng.randint(20, int(duration) - 20)),
             "type": "click",
             "target": "#" + (click_target if rng.random() < 0.7
                              else rng.choice(node_ids)),
             "payload": {"x": rng.randint(1, 99)}}
            for _ in range(rng.randint(1, 3))
        ]
    if use_xhr:
        body_text = "payload-" + "x" * rng.randint(4, 40)
        n = len(body_text)
        cut = rng.randint(1, n - 1)
        scenario["responses"] = {
            "/api": {
                "status": rng.choice([200, 200, 404]),
                "body": body_text,
                "schedule": [
                    {"after_ms": float(rng.randint(10, 60)), "bytes": cut},
                    {"after_ms": float(rng.randint(10, 60)), "bytes": n - cut},
                ],
            }
        }
    return [("app", "\n".join(lines))], scenario


def corpus(size: int = CORPUS_SIZE):
    for index in range(size):
        yield index, *make_triple(index)
