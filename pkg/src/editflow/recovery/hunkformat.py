"""Tagged text form of an edit hunk, as shown to order-recovery models.

The layout is three tags. ``<code>`` holds one record per line::

    {pre:>w} {post:>w} {m}  {content}

where ``w`` is the digit width of the largest line number in the record set,
``m`` is blank for context rows, ``-`` for deleted rows (post column blank)
and ``+`` for inserted rows (pre column blank), and ``content`` is the source
line verbatim. Example record set for a one-line replacement at line 478 with
one context line on each side::

    477 477        if opts.keep_focus and active:
    478     -          boss.set_active_window(active, switch_os_window_if_needed=True)
        478 +          boss.set_active_window(active, switch_os_window_if_needed=True, for_keep_focus=True)
    479 479            if opts.logo:
"""

from __future__ import annotations

import re

from editflow.corpus.model import EditHunk, split_lines

_ROW_MAX_WIDTH = 12


def _rows_for(
    h: EditHunk,
    post_start: int,
    context_before: tuple[tuple[int, str], ...],
    context_after: tuple[tuple[int, str], ...],
) -> list[tuple[int | None, int | None, str, str]]:
    rows: list[tuple[int | None, int | None, str, str]] = []
    shift = post_start - h.line_start
    for lineno, text in context_before:
        rows.append((lineno, lineno + shift, " ", text))
    for i, text in enumerate(split_lines(h.content_pre)):
        rows.append((h.line_start + i, None, "-", text))
    for i, text in enumerate(split_lines(h.content_post)):
        rows.append((None, post_start + i, "+", text))
    for i, (lineno, text) in enumerate(context_after):
        rows.append((lineno, lineno + shift + h.delta, " ", text))
    return rows


def serialize_hunk(
    h: EditHunk,
    *,
    post_start: int | None = None,
    context_before: tuple[tuple[int, str], ...] = (),
    context_after: tuple[tuple[int, str], ...] = (),
) -> str:
    """Render ``h`` in the tagged three-part form.

    ``post_start`` is the first post-change line number of the region; it
    defaults to ``h.line_start`` (no preceding offset). Context rows are
    optional ``(line_number, text)`` pairs in pre-change numbering.
    """
    if post_start is None:
        post_start = h.line_start
    rows = _rows_for(h, post_start, context_before, context_after)
    width = max(
        (len(str(n)) for pre, post, _, _ in rows for n in (pre, post) if n is not None),
        default=1,
    )

    def col(n: int | None) -> str:
        return " " * width if n is None else f"{n:>{width}}"

    body = "\n".join(f"{col(pre)} {col(post)} {marker}  {text}" for pre, post, marker, text in rows)
    if h.structural_path:
        structural = f"<structural_path>\n{h.structural_path}\n</structural_path>"
    else:
        structural = "<structural_path></structural_path>"
    return (
        f"<file_path>{h.file}</file_path>\n"
        f"{structural}\n"
        f"<code>\n{body}\n</code>"
    )


def _try_width(lines: list[str], width: int) -> list[tuple[int | None, int | None, str, str]] | None:
    pattern = re.compile(
        rf"^([ \d]{{{width}}}) ([ \d]{{{width}}}) ([ +-])  (.*)$"
    )
    rows = []
    for line in lines:
        m = pattern.match(line)
        if m is None:
            return None
        pre_s, post_s, marker, content = m.groups()
        pre = int(pre_s) if pre_s.strip() else None
        post = int(post_s) if post_s.strip() else None
        if marker == "-" and (pre is None or post is not None):
            return None
        if marker == "+" and (post is None or pre is not None):
            return None
        if marker == " " and (pre is None or post is None):
            return None
        if pre_s.strip() and not re.fullmatch(r" *\d+", pre_s):
            return None
        if post_s.strip() and not re.fullmatch(r" *\d+", post_s):
            return None
        rows.append((pre, post, marker, content))
    return rows


def parse_serialized_hunk(text: str) -> dict:
    """Recover the fields of a serialized hunk (round-trip of the grammar).

    Returns file, structural_path, line_start, line_end, content_pre and
    content_post. Context rows are recognized and dropped. Line numbers of a
    pure insertion are recovered under the default ``post_start`` convention.
    """
    file_m = re.search(r"<file_path>(.*?)</file_path>", text, re.DOTALL)
    struct_m = re.search(r"<structural_path>(.*?)</structural_path>", text, re.DOTALL)
    code_m = re.search(r"<code>\n(.*?)\n</code>", text, re.DOTALL)
    if not (file_m and struct_m and code_m):
        raise ValueError("missing required tags")
    structural = struct_m.group(1)
    if structural.startswith("\n"):
        structural = structural[1:]
    if structural.endswith("\n"):
        structural = structural[:-1]

    lines = code_m.group(1).split("\n")
    rows = None
    for width in range(1, _ROW_MAX_WIDTH + 1):
        rows = _try_width(lines, width)
        if rows is not None:
            break
    if rows is None:
        raise ValueError("code rows do not match the record grammar")

    pre_numbers = [pre for pre, _, marker, _ in rows if marker == "-"]
    pre_lines = [content for _, _, marker, content in rows if marker == "-"]
    post_lines = [content for _, _, marker, content in rows if marker == "+"]
    if pre_numbers:
        line_start, line_end = pre_numbers[0], pre_numbers[-1]
    else:
        post_numbers = [post for _, post, marker, _ in rows if marker == "+"]
        if not post_numbers:
            raise ValueError("no change rows present")
        line_start = post_numbers[0]
        line_end = line_start - 1

    def join(lines_: list[str]) -> str:
        return "".join(ln + "\n" for ln in lines_)

    return {
        "file": file_m.group(1),
        "structural_path": structural,
        "line_start": line_start,
        "line_end": line_end,
        "content_pre": join(pre_lines),
        "content_post": join(post_lines),
    }


__all__ = ["parse_serialized_hunk", "serialize_hunk"]
