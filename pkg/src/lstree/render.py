"""DOT rendering of the fitted trees.

One digraph per component, in the style of the usual tree plots: internal
nodes labeled with the split condition, left edges "<= c", right edges
"> c", terminal nodes labeled with the aggregate effect (the sum of
increments along the path, to 3 decimals) and the node size.
"""

from .model_core import LOCATION


def _terminal_info(model, component):
    report = model.trace
    if report is None:
        return {}
    table = (
        report.location_terminals if component == LOCATION else report.scale_terminals
    )
    return {t.node_id: t for t in table}


def export_dot(model, component):
    """Render one component's tree as DOT text."""
    splits = model.structure.splits_of(component)
    names = [s.name for s in model.specs] if model.specs else None
    split_of = {s.node_id: s for s in splits}
    info = _terminal_info(model, component)
    symbol = "beta" if component == LOCATION else "gamma"

    lines = [
        f"digraph {component}_tree {{",
        "  node [shape=box, fontname=\"Helvetica\"];",
    ]
    effects = {1: 0.0}
    seen = set()
    queue = [1]
    while queue:
        nid = queue.pop(0)
        if nid in seen:
            continue
        seen.add(nid)
        s = split_of.get(nid)
        if s is not None:
            var = names[s.variable] if names else f"x{s.variable}"
            lines.append(f'  n{nid} [label="{var} <= {s.threshold + 0.0:g}"];')
            effects[s.left_child_id] = effects[nid] + s.increment
            effects[s.right_child_id] = effects[nid]
            lines.append(f'  n{nid} -> n{s.left_child_id} [label="<= {s.threshold + 0.0:g}"];')
            lines.append(f'  n{nid} -> n{s.right_child_id} [label="> {s.threshold + 0.0:g}"];')
            queue.extend((s.left_child_id, s.right_child_id))
        else:
            t = info.get(nid)
            n_part = f"\\nn = {t.n}" if t is not None else ""
            lines.append(
                f'  n{nid} [label="{symbol} = {effects[nid]:.3f}{n_part}", style=filled, fillcolor=lightgrey];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(model, component, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(export_dot(model, component))
