"""PDF export utilities for the modal workbench.

Lays out a Markdown report (suite or filtration) as a plain PDF.
"""

import textwrap
from io import BytesIO

from reportlab.lib.pagesizes import LETTER
from reportlab.pdfgen import canvas

HEADING_SIZES = {1: 14, 2: 12}
BODY_SIZE = 10
WRAP_COLUMNS = 100


def _markdown_line(line: str):
    """Split a Markdown line into (text, font, size, indent)."""
    stripped = line.lstrip("#")
    level = len(line) - len(stripped)
    if level:
        return stripped.strip(), "Helvetica-Bold", HEADING_SIZES.get(level, BODY_SIZE), 0
    indent = 12 if line.startswith("- ") else 0
    # formulas and frames are written as code spans
    font = "Courier" if "`" in line else "Helvetica"
    return line.replace("**", "").replace("`", ""), font, BODY_SIZE, indent


def report_to_pdf(markdown_text: str, title: str = "Modal Workbench Report") -> bytes:
    """Render a Markdown report; headings are bold, long lines wrap.

    Returns:
        PDF bytes
    """
    buffer = BytesIO()
    c = canvas.Canvas(buffer, pagesize=LETTER)
    width, height = LETTER

    x_margin = 40
    y = height - 50

    def write_line(text: str = "", font: str = "Helvetica", size: int = BODY_SIZE, indent: int = 0):
        nonlocal y
        for chunk in textwrap.wrap(text, WRAP_COLUMNS, subsequent_indent="  ") or [""]:
            if y < 60:  # new page if too low
                c.showPage()
                y = height - 50
            c.setFont(font, size)
            c.drawString(x_margin + indent, y, chunk)
            y -= size + 4

    c.setTitle(title)
    write_line(title, "Helvetica-Bold", HEADING_SIZES[1])
    write_line()

    for line in markdown_text.splitlines():
        write_line(*_markdown_line(line))

    c.showPage()
    c.save()
    pdf = buffer.getvalue()
    buffer.close()
    return pdf
