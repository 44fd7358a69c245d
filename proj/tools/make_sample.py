#!/usr/bin/env python3
"""Generate tests/fixtures/sample.xlsx: four sheets of power figures.

PXII, Clipper and Flash hold per-row currents/voltages (rows 2..30) with
product formulas stored as shared formulas; Clipper leaves rows 16-17 empty.
Summary combines the other sheets. Cached values are computed here so the
file looks like one saved by a spreadsheet program.

Usage: make_sample.py [output-path]
"""
import os
import sys
import zipfile
from xml.sax.saxutils import escape

ROWS = range(2, 31)
STAMP = (1980, 1, 1, 0, 0, 0)


def col(c):
    s = ""
    while c:
        c, r = divmod(c - 1, 26)
        s = chr(65 + r) + s
    return s


def num(v):
    return "%.15g" % v


class SheetWriter:
    def __init__(self, strings):
        self.cells = {}  # (row, col) -> xml
        self.strings = strings

    def text(self, ref_col, row, s):
        if s not in self.strings:
            self.strings.append(s)
        self.cells[(row, ref_col)] = '<c r="%s%d" t="s"><v>%d</v></c>' % (
            col(ref_col), row, self.strings.index(s))

    def number(self, ref_col, row, v):
        self.cells[(row, ref_col)] = '<c r="%s%d"><v>%s</v></c>' % (col(ref_col), row, num(v))

    def formula(self, ref_col, row, f, cached, shared=None):
        """shared = (si, ref) for the master cell, (si, None) for followers."""
        if shared is None:
            body = "<f>%s</f>" % escape(f)
        elif shared[1] is not None:
            body = '<f t="shared" ref="%s" si="%d">%s</f>' % (shared[1], shared[0], escape(f))
        else:
            body = '<f t="shared" si="%d"/>' % shared[0]
        self.cells[(row, ref_col)] = '<c r="%s%d">%s<v>%s</v></c>' % (
            col(ref_col), row, body, num(cached))

    def xml(self):
        out = ['<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
               '<worksheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">'
               "<sheetData>"]
        for row in sorted({r for r, _ in self.cells}):
            out.append('<row r="%d">' % row)
            for c in sorted(c for r, c in self.cells if r == row):
                out.append(self.cells[(row, c)])
            out.append("</row>")
        out.append("</sheetData></worksheet>")
        return "".join(out)


class SharedIds:
    def __init__(self):
        self.next = 0

    def column(self, sheet, c, rows, f_master, template, values):
        """Writes a column of coherent formulas as shared-formula runs."""
        runs = []
        for r in rows:
            if runs and runs[-1][-1] == r - 1:
                runs[-1].append(r)
            else:
                runs.append([r])
        for run in runs:
            si = self.next
            self.next += 1
            top, bottom = run[0], run[-1]
            for r in run:
                if r == top:
                    ref = "%s%d:%s%d" % (col(c), top, col(c), bottom)
                    sheet.formula(c, r, template(r), values[r], (si, ref))
                else:
                    sheet.formula(c, r, template(r), values[r], (si, None))


def build():
    strings = []
    ids = SharedIds()
    sheets = []

    # PXII: Idd Vdd Pdd | IIO VIO PIO | IM VM PM | Ptotal
    pxii = SheetWriter(strings)
    for c, h in zip(range(2, 12), ["Idd", "Vdd", "Pdd", "IIO", "VIO", "PIO", "IM", "VM", "PM", "Ptotal"]):
        pxii.text(c, 1, h)
    idd = {r: round(0.4 + 0.01 * (r - 2), 6) for r in ROWS}
    vdd = {r: round(3.0 + 0.05 * ((r - 2) % 4), 6) for r in ROWS}
    iio = {r: round(0.2 + 0.005 * (r - 2), 6) for r in ROWS}
    vio = {r: 1.8 for r in ROWS}
    im = {r: round(0.1 + 0.002 * (r - 2), 6) for r in ROWS}
    vm = {r: 1.2 for r in ROWS}
    pdd = {r: idd[r] * vdd[r] for r in ROWS}
    pio = {r: iio[r] * vio[r] for r in ROWS}
    pm = {r: im[r] * vm[r] for r in ROWS}
    pxii_total = {r: pdd[r] + pio[r] + pm[r] for r in ROWS}
    for r in ROWS:
        pxii.number(2, r, idd[r])
        pxii.number(3, r, vdd[r])
        pxii.number(5, r, iio[r])
        pxii.number(6, r, vio[r])
        pxii.number(8, r, im[r])
        pxii.number(9, r, vm[r])
    ids.column(pxii, 4, ROWS, None, lambda r: "B%d*C%d" % (r, r), pdd)
    ids.column(pxii, 7, ROWS, None, lambda r: "E%d*F%d" % (r, r), pio)
    ids.column(pxii, 10, ROWS, None, lambda r: "H%d*I%d" % (r, r), pm)
    ids.column(pxii, 11, ROWS, None, lambda r: "D%d+G%d+J%d" % (r, r, r), pxii_total)
    sheets.append(("PXII", pxii))

    # Clipper: Idd Vdd Pdd | ICS VCS PCS | Ptotal; rows 16-17 left empty
    clip = SheetWriter(strings)
    for c, h in zip(range(2, 9), ["Idd", "Vdd", "Pdd", "ICS", "VCS", "PCS", "Ptotal"]):
        clip.text(c, 1, h)
    crow = [r for r in ROWS if r not in (16, 17)]
    c_idd = {r: round(0.25 + 0.004 * (r - 2), 6) for r in crow}
    c_vdd = {r: 1.5 for r in crow}
    c_ics = {r: round(0.05 + 0.001 * (r - 2), 6) for r in crow}
    c_vcs = {r: 3.3 for r in crow}
    c_pdd = {r: c_idd[r] * c_vdd[r] for r in crow}
    c_pcs = {r: c_ics[r] * c_vcs[r] for r in crow}
    c_total = {r: c_pdd[r] + c_pcs[r] for r in crow}
    for r in crow:
        clip.number(2, r, c_idd[r])
        clip.number(3, r, c_vdd[r])
        clip.number(5, r, c_ics[r])
        clip.number(6, r, c_vcs[r])
    ids.column(clip, 4, crow, None, lambda r: "B%d*C%d" % (r, r), c_pdd)
    ids.column(clip, 7, crow, None, lambda r: "E%d*F%d" % (r, r), c_pcs)
    ids.column(clip, 8, crow, None, lambda r: "SUM(D%d,G%d)" % (r, r), c_total)
    sheets.append(("Clipper", clip))

    # Flash: IIO VIO PIO | IM VM PM | Ptotal; column A empty
    flash = SheetWriter(strings)
    for c, h in zip(range(2, 9), ["IIO", "VIO", "PIO", "IM", "VM", "PM", "Ptotal"]):
        flash.text(c, 1, h)
    f_iio = {r: round(0.12 + 0.003 * (r - 2), 6) for r in ROWS}
    f_vio = {r: 1.8 for r in ROWS}
    f_im = {r: round(0.3 + 0.002 * (r - 2), 6) for r in ROWS}
    f_vm = {r: 3.3 for r in ROWS}
    f_pio = {r: f_iio[r] * f_vio[r] for r in ROWS}
    f_pm = {r: f_im[r] * f_vm[r] for r in ROWS}
    f_total = {r: f_pio[r] + f_pm[r] for r in ROWS}
    for r in ROWS:
        flash.number(2, r, f_iio[r])
        flash.number(3, r, f_vio[r])
        flash.number(5, r, f_im[r])
        flash.number(6, r, f_vm[r])
    ids.column(flash, 4, ROWS, None, lambda r: "B%d*C%d" % (r, r), f_pio)
    ids.column(flash, 7, ROWS, None, lambda r: "E%d*F%d" % (r, r), f_pm)
    ids.column(flash, 8, ROWS, None, lambda r: "D%d+G%d" % (r, r), f_total)
    sheets.append(("Flash", flash))

    # Summary: per-row comparisons plus two aggregates in G2/H2.
    summ = SheetWriter(strings)
    for c, h in [(2, "Pavg"), (3, "deviation2"), (4, "Pdiff"), (7, "avg"), (8, "Ctotal")]:
        summ.text(c, 1, h)
    pavg = {r: (pxii_total[r] + f_total[r]) / 2 for r in ROWS}
    avg = sum(pavg.values()) / len(pavg)
    for r in ROWS:
        summ.formula(2, r, "AVERAGE(PXII!K%d,Flash!H%d)" % (r, r), pavg[r])
        summ.formula(3, r, "(B%d-$G$2)^2" % r, (pavg[r] - avg) ** 2)
        summ.formula(4, r, "Clipper!H%d-PXII!K%d" % (r, r), c_total.get(r, 0.0) - pxii_total[r])
    summ.formula(7, 2, "AVERAGE(B2:B30)", avg)
    summ.formula(8, 2, "SUM(Clipper!H2:H30)", sum(c_total.values()))
    sheets.append(("Summary", summ))
    return sheets, strings


def package(sheets, strings):
    ns = "http://schemas.openxmlformats.org"
    decl = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
    parts = []
    overrides = "".join(
        '<Override PartName="/xl/worksheets/sheet%d.xml" ContentType="application/'
        'vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>' % (i + 1)
        for i in range(len(sheets)))
    parts.append(("[Content_Types].xml", decl +
                  '<Types xmlns="%s/package/2006/content-types">'
                  '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
                  '<Default Extension="xml" ContentType="application/xml"/>'
                  '<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>'
                  '<Override PartName="/xl/styles.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.styles+xml"/>'
                  '<Override PartName="/xl/sharedStrings.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sharedStrings+xml"/>'
                  '%s</Types>' % (ns, overrides)))
    parts.append(("_rels/.rels", decl +
                  '<Relationships xmlns="%s/package/2006/relationships">'
                  '<Relationship Id="rId1" Type="%s/officeDocument/2006/relationships/officeDocument" '
                  'Target="xl/workbook.xml"/></Relationships>' % (ns, ns)))
    sheet_entries = "".join(
        '<sheet name="%s" sheetId="%d" r:id="rId%d"/>' % (name, i + 1, i + 1)
        for i, (name, _) in enumerate(sheets))
    parts.append(("xl/workbook.xml", decl +
                  '<workbook xmlns="%s/spreadsheetml/2006/main" '
                  'xmlns:r="%s/officeDocument/2006/relationships">'
                  '<sheets>%s</sheets><calcPr calcId="191029"/></workbook>' % (ns, ns, sheet_entries)))
    rels = "".join(
        '<Relationship Id="rId%d" Type="%s/officeDocument/2006/relationships/worksheet" '
        'Target="worksheets/sheet%d.xml"/>' % (i + 1, ns, i + 1) for i in range(len(sheets)))
    n = len(sheets)
    rels += ('<Relationship Id="rId%d" Type="%s/officeDocument/2006/relationships/styles" '
             'Target="styles.xml"/>' % (n + 1, ns))
    rels += ('<Relationship Id="rId%d" Type="%s/officeDocument/2006/relationships/sharedStrings" '
             'Target="sharedStrings.xml"/>' % (n + 2, ns))
    parts.append(("xl/_rels/workbook.xml.rels", decl +
                  '<Relationships xmlns="%s/package/2006/relationships">%s</Relationships>' % (ns, rels)))
    parts.append(("xl/styles.xml", decl +
                  '<styleSheet xmlns="%s/spreadsheetml/2006/main">'
                  '<fonts count="1"><font><sz val="11"/><name val="Calibri"/></font></fonts>'
                  '<fills count="1"><fill><patternFill patternType="none"/></fill></fills>'
                  '<borders count="1"><border/></borders>'
                  '<cellStyleXfs count="1"><xf numFmtId="0" fontId="0" fillId="0" borderId="0"/></cellStyleXfs>'
                  '<cellXfs count="1"><xf numFmtId="0" fontId="0" fillId="0" borderId="0" xfId="0"/></cellXfs>'
                  '</styleSheet>' % ns))
    sst = "".join("<si><t>%s</t></si>" % escape(s) for s in strings)
    parts.append(("xl/sharedStrings.xml", decl +
                  '<sst xmlns="%s/spreadsheetml/2006/main" uniqueCount="%d">%s</sst>' % (ns, len(strings), sst)))
    for i, (_, sheet) in enumerate(sheets):
        parts.append(("xl/worksheets/sheet%d.xml" % (i + 1), sheet.xml()))
    return parts


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "..", "tests", "fixtures", "sample.xlsx")
    sheets, strings = build()
    with zipfile.ZipFile(out, "w", zipfile.ZIP_DEFLATED) as zf:
        for name, data in package(sheets, strings):
            info = zipfile.ZipInfo(name, STAMP)
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, data.encode("utf-8"))
    print(out)


if __name__ == "__main__":
    main()
