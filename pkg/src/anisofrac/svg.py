"""Minimal self-contained SVG line charts (no external assets or libraries)."""

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    return [lo + span * i / (n - 1) for i in range(n)]


def line_chart(path, x, series, labels=None, title="", xlabel="", ylabel="",
               width=640, height=420):
    """Write a polyline chart of one or more series against a shared x-axis."""
    series = [list(map(float, ys)) for ys in series]
    x = list(map(float, x))
    if any(len(ys) != len(x) for ys in series):
        raise ValueError("series lengths differ from the x-axis length")
    labels = labels or [f"series {i}" for i in range(len(series))]

    ml, mr, mt, mb = 64, 16, 28, 44
    pw, ph = width - ml - mr, height - mt - mb
    x0, x1 = min(x), max(x)
    ally = [v for ys in series for v in ys]
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return ml + pw * (v - x0) / (x1 - x0)

    def py(v):
        return mt + ph * (1.0 - (v - y0) / (y1 - y0))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{title}</text>',
    ]
    # axes and ticks
    parts.append(
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#333" stroke-width="1"/>'
    )
    for tx in _ticks(x0, x1):
        parts.append(
            f'<line x1="{px(tx):.1f}" y1="{mt+ph}" x2="{px(tx):.1f}" y2="{mt+ph+4}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{px(tx):.1f}" y="{mt+ph+16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{tx:.3g}</text>'
        )
    for ty in _ticks(y0, y1):
        parts.append(
            f'<line x1="{ml-4}" y1="{py(ty):.1f}" x2="{ml}" y2="{py(ty):.1f}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{ml-7}" y="{py(ty)+3:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{ty:.3g}</text>'
        )
    if xlabel:
        parts.append(
            f'<text x="{ml+pw/2:.1f}" y="{height-8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{xlabel}</text>'
        )
    if ylabel:
        parts.append(
            f'<text x="14" y="{mt+ph/2:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11" '
            f'transform="rotate(-90 14 {mt+ph/2:.1f})">{ylabel}</text>'
        )
    for i, ys in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{ml+pw-6}" y="{mt+14+13*i}" text-anchor="end" fill="{color}" '
            f'font-family="sans-serif" font-size="10">{labels[i]}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
    return path
