#!/usr/bin/env python3
"""Regenerate the mini-ecosystem fixture under tests/data/mini/.

The fixture is a ~35-package analog of a real distribution: a compression
hub everything depends on, a crypto library below it, runtimes, desktop
stacks, a couple of curation casualties (version duplicate, docs-only,
legacy VCS), two packages missing from the vulnerability tracker mapping,
and scripted commit histories with known bus factors.  Everything is
deterministic; rerun after editing and review the diff.
"""

from __future__ import annotations

import csv
import json
import shutil
from datetime import datetime, timezone
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "mini"

# id -> (version, licenses, dependencies)
PACKAGES: dict[str, tuple[str, list[str], list[str]]] = {
    "zlib": ("1.3.1", ["Zlib"], []),
    "openssl": ("3.0.13", ["Apache-2.0"], ["zlib"]),
    "libpng": ("1.6.43", ["libpng-2.0"], ["zlib"]),
    "libxml2": ("2.12.5", ["MIT"], ["zlib", "xz"]),
    "pcre2": ("10.43", ["BSD-3-Clause"], []),
    "expat": ("2.6.2", ["MIT"], []),
    "libffi": ("3.4.6", ["MIT"], []),
    "ncurses": ("6.4", ["MIT"], []),
    "readline": ("8.2", ["GPL-3.0-or-later"], ["ncurses"]),
    "sqlite": ("3.45.1", [], ["zlib", "readline"]),
    "gdbm": ("1.23", ["GPL-3.0-or-later"], ["readline"]),
    "bzip2": ("1.0.8", ["bzip2-1.0.6"], []),
    "xz": ("5.4.6", ["0BSD", "GPL-2.0-or-later"], []),
    "libssh2": ("1.11.0", ["BSD-3-Clause"], ["openssl", "zlib"]),
    "nghttp2": ("1.59.0", ["MIT"], ["openssl", "zlib"]),
    "curl": ("8.6.0", ["curl"], ["openssl", "zlib", "libssh2", "nghttp2"]),
    "git": ("2.44.0", ["GPL-2.0-only"], ["curl", "zlib", "openssl", "expat", "pcre2"]),
    "python311": ("3.11.8", ["Python-2.0"],
                  ["openssl", "zlib", "expat", "libffi", "sqlite", "readline", "bzip2", "xz", "ncurses"]),
    "python310": ("3.10.13", ["Python-2.0"],
                  ["openssl", "zlib", "expat", "libffi", "sqlite", "readline", "bzip2", "xz", "ncurses"]),
    "perl": ("5.38.2", ["Artistic-1.0-Perl", "GPL-1.0-or-later"], ["zlib", "gdbm"]),
    "ruby": ("3.3.0", ["BSD-2-Clause", "Ruby"], ["openssl", "zlib", "libffi", "readline"]),
    "nodejs": ("20.11.1", ["MIT"], ["openssl", "zlib", "nghttp2"]),
    "systemd": ("255.4", ["LGPL-2.1-or-later"], ["zlib", "xz", "openssl"]),
    "dbus": ("1.14.10", ["AFL-2.1", "GPL-2.0-or-later"], ["expat"]),
    "glib": ("2.80.0", ["LGPL-2.1-or-later"], ["libffi", "pcre2", "zlib"]),
    "gtk": ("4.14.1", ["LGPL-2.1-or-later"], ["glib", "libpng", "expat"]),
    "cairo": ("1.18.0", ["LGPL-2.1-only", "MPL-1.1"], ["libpng", "zlib"]),
    "pango": ("1.52.0", ["LGPL-2.1-or-later"], ["glib", "cairo"]),
    "librsvg": ("2.57.1", ["LGPL-2.1-or-later"], ["glib", "cairo", "libxml2"]),
    "imagemagick": ("7.1.1-29", ["ImageMagick"], ["libpng", "libxml2", "zlib", "bzip2"]),
    "manpages": ("6.06", [], []),
    "heirloom-tools": ("070715", [], ["ncurses"]),
    "wget": ("1.21.4", ["GPL-3.0-or-later"], ["openssl", "zlib", "pcre2"]),
    "openssh": ("9.6p1", ["BSD-2-Clause"], ["openssl", "zlib"]),
    "nginx": ("1.25.4", ["BSD-2-Clause"], ["openssl", "zlib", "pcre2"]),
}

REPO = "https://git.example.org/{}.git"

# id -> (language, category, backer, debian_source, repo_slug, excluded_reason)
CURATION: dict[str, tuple[str, str, str, str, str, str]] = {
    "zlib": ("C", "Support", "single person", "zlib", "zlib", ""),
    "openssl": ("C", "Crypto", "NPO", "openssl", "openssl", ""),
    "libpng": ("C", "Graphics", "single person", "libpng1.6", "libpng", ""),
    "libxml2": ("C", "Support", "NPO", "libxml2", "", ""),
    "pcre2": ("C", "Support", "single person", "pcre2", "", ""),
    "expat": ("C", "Support", "single person", "expat", "expat", ""),
    "libffi": ("C", "Support", "single person", "libffi", "", ""),
    "ncurses": ("C", "Terminal", "NPO", "ncurses", "", ""),
    "readline": ("C", "Terminal", "NPO", "readline", "", ""),
    "sqlite": ("C", "Database", "single person", "sqlite3", "", ""),
    "gdbm": ("C", "Database", "NPO", "gdbm", "gdbm", ""),
    "bzip2": ("C", "Support", "single person", "bzip2", "", ""),
    "xz": ("C", "Support", "single person", "xz-utils", "", ""),
    "libssh2": ("C", "Network", "single person", "", "", ""),
    "nghttp2": ("C", "Network", "single person", "nghttp2", "", ""),
    "curl": ("C", "Network", "single person", "curl", "curl", ""),
    "git": ("C", "Tools", "NPO", "git", "", ""),
    "python311": ("Python", "Runtime", "NPO", "python3.11", "cpython", ""),
    "python310": ("Python", "Runtime", "NPO", "", "", "duplicate-version"),
    "perl": ("Perl", "Runtime", "NPO", "perl", "perl5", ""),
    "ruby": ("Ruby", "Runtime", "NPO", "ruby3.3", "ruby", ""),
    "nodejs": ("C++", "Runtime", "NPO", "nodejs", "", ""),
    "systemd": ("C", "System", "company", "systemd", "systemd", ""),
    "dbus": ("C", "System", "NPO", "dbus", "", ""),
    "glib": ("C", "Support", "NPO", "glib2.0", "glib", ""),
    "gtk": ("C", "Desktop", "NPO", "gtk4", "", ""),
    "cairo": ("C", "Graphics", "NPO", "cairo", "", ""),
    "pango": ("C", "Desktop", "NPO", "", "", ""),
    "librsvg": ("Rust", "Graphics", "NPO", "librsvg", "", ""),
    "imagemagick": ("C", "Graphics", "company", "imagemagick", "", ""),
    "manpages": ("", "Documentation", "unknown", "", "", "docs-only"),
    "heirloom-tools": ("C", "Tools", "unknown", "", "", "legacy-vcs"),
    "wget": ("C", "Network", "NPO", "wget", "", ""),
    "openssh": ("C", "Network", "NPO", "openssh", "", ""),
    "nginx": ("C", "Network", "company", "nginx", "nginx", ""),
}

TRACKER = {
    "zlib": {
        "CVE-2023-45853": {"description": "integer overflow in zip handling",
                           "releases": {"bookworm": {"status": "open", "urgency": "low"}}},
        "CVE-2022-37434": {"description": "heap over-read in inflate",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "1:1.2.13.dfsg-1"}}},
        "CVE-2018-25032": {"description": "memory corruption on crafted input",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "1:1.2.11.dfsg-2"}}},
        "TEMP-0000000-6B0C31": {"description": "unassigned issue under review",
                                "releases": {"bookworm": {"status": "open"}}},
    },
    "openssl": {
        "CVE-2024-0727": {"description": "PKCS12 null dereference",
                          "releases": {"bookworm": {"status": "open", "urgency": "medium"}}},
        "CVE-2023-5678": {"description": "DH key generation slowdown",
                          "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-6129": {"description": "POLY1305 MAC corruption",
                          "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-6237": {"description": "RSA key check denial of service",
                          "releases": {"bookworm": {"status": "open"}}},
        "CVE-2024-2511": {"description": "unbounded session cache growth",
                          "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-5363": {"description": "IV truncation in key derivation",
                          "releases": {"bookworm": {"status": "open"}}},
        "CVE-2022-3602": {"description": "X.509 punycode buffer overflow",
                          "releases": {"bookworm": {"status": "resolved", "fixed_version": "3.0.7-1"}}},
        "CVE-2022-3786": {"description": "X.509 punycode stack overflow",
                          "releases": {"bookworm": {"status": "resolved", "fixed_version": "3.0.7-1"}}},
    },
    "systemd": {
        "CVE-2023-31437": {"description": "journal forgery", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-31438": {"description": "journal truncation", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-31439": {"description": "sealed log manipulation", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-50387": {"description": "resolved DNSSEC exhaustion", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-50868": {"description": "NSEC3 closest encloser abuse", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-7008": {"description": "unsigned name cache poisoning", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2022-3821": {"description": "off-by-one in format_timespan",
                          "releases": {"bookworm": {"status": "resolved", "fixed_version": "252.1-1"}}},
    },
    "gdbm": {
        "CVE-2019-10001": {"description": "crafted database crash", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2019-10002": {"description": "hash table over-read", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2019-10003": {"description": "directory entry corruption", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2019-10004": {"description": "recovery routine overflow", "releases": {"bookworm": {"status": "open"}}},
    },
    "perl": {
        "CVE-2023-31484": {"description": "CPAN missing TLS verification", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-31486": {"description": "HTTP::Tiny missing TLS verification", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2022-48522": {"description": "stack recursion crash", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-47038": {"description": "regex property name overflow",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "5.36.0-7+deb12u1"}}},
    },
    "expat": {
        "CVE-2023-52425": {"description": "large token denial of service", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-52426": {"description": "recursive entity expansion", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2024-28757": {"description": "entity expansion in external parser", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2022-43680": {"description": "use-after-free in doctype",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "2.5.0-1"}}},
        "CVE-2022-40674": {"description": "use-after-free in xmlparse",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "2.4.9-1"}}},
    },
    "curl": {
        "CVE-2023-46218": {"description": "cookie mixed case bypass",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "7.88.1-10+deb12u5"}}},
        "CVE-2023-38545": {"description": "SOCKS5 heap buffer overflow",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "7.88.1-10+deb12u4"}}},
        "CVE-2023-38546": {"description": "cookie injection with none file",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "7.88.1-10+deb12u4"}}},
    },
    "sqlite3": {
        "CVE-2023-7104": {"description": "sessions extension heap over-read",
                          "releases": {"bookworm": {"status": "resolved", "fixed_version": "3.40.1-2+deb12u1"}}},
    },
    "python3.11": {
        "CVE-2023-24329": {"description": "urllib blocklist bypass",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "3.11.3-1"}}},
        "CVE-2024-0450": {"description": "zip quoted-overlap bomb",
                          "releases": {"bookworm": {"status": "resolved", "fixed_version": "3.11.8-1"}}},
        "CVE-2024-4032": {"description": "private IP ranges misclassified",
                          "releases": {"sid": {"status": "open"}}},
    },
    "git": {
        "CVE-2023-25652": {"description": "apply path traversal",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "1:2.39.2-1.1"}}},
        "CVE-2023-29007": {"description": "config injection on rename",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "1:2.39.2-1.1"}}},
    },
    "nginx": {
        "CVE-2023-44487": {"description": "HTTP/2 rapid reset",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "1.22.1-9"}}},
        "CVE-2024-7347": {"description": "mp4 module over-read",
                          "releases": {"bookworm": {"status": "undetermined"}}},
    },
    "glib2.0": {
        "CVE-2024-34397": {"description": "dbus signal subscription spoofing",
                           "releases": {"bookworm": {"status": "open", "urgency": "medium"}}},
    },
    "wget": {
        "CVE-2021-31879": {"description": "authorization header leak on redirect",
                           "releases": {"bookworm": {"status": "open", "urgency": "low"}}},
    },
    "linux": {
        "CVE-2024-26581": {"description": "nftables rbtree use-after-free",
                           "releases": {"bookworm": {"status": "open"}}},
        "CVE-2024-26582": {"description": "ktls use-after-free", "releases": {"bookworm": {"status": "open"}}},
        "CVE-2023-52429": {"description": "dm verity signature bypass",
                           "releases": {"bookworm": {"status": "resolved", "fixed_version": "6.1.76-1"}}},
    },
}

# slug -> (first date, [(author-name, email, commit count), ...])
# Commits are spaced ~37 days apart from the first date, round-robin by
# remaining share so the multiset of per-author counts is exact.
HISTORIES: dict[str, tuple[str, list[tuple[str, str, int]]]] = {
    "zlib": ("2014-03-18", [("Alice Maintainer", "alice@zlib.example", 24),
                            ("Bob Contributor", "bob@zlib.example", 6)]),
    "openssl": ("2015-06-01", [("Nadja Core", "nadja@openssl.example", 14),
                               ("Omar Core", "omar@openssl.example", 12),
                               ("Priya Dev", "priya@openssl.example", 8),
                               ("Quentin Dev", "quentin@openssl.example", 6)]),
    "expat": ("2016-01-15", [("Solo Author", "solo@expat.example", 12)]),
    "gdbm": ("2018-09-01", [("Grete Hacker", "grete@gdbm.example", 5),
                            ("Hugo Hacker", "hugo@gdbm.example", 4)]),
    "curl": ("2014-05-20", [("Dana Lead", "dana@curl.example", 20),
                            ("Eli Helper", "eli@curl.example", 5)]),
    "cpython": ("2010-08-01", [("Ada Core", "ada@python.example", 15),
                               ("Ben Core", "ben@python.example", 12),
                               ("Cleo Core", "cleo@python.example", 11),
                               ("Dev Core", "dev@python.example", 10),
                               ("Eve Triager", "eve@python.example", 7),
                               ("Fay Docs", "fay@python.example", 5)]),
    "perl5": ("2012-02-29", [("Pumpking One", "p1@perl.example", 8),
                             ("Pumpking Two", "p2@perl.example", 7),
                             ("Pumpking Three", "p3@perl.example", 5)]),
    "systemd": ("2017-03-01", [("Lena Sys", "lena@systemd.example", 12),
                               ("Milo Sys", "milo@systemd.example", 10),
                               ("Nora Sys", "nora@systemd.example", 8),
                               ("Ture Sys", "ture@systemd.example", 6)]),
    "glib": ("2019-11-11", [("Gert Glib", "gert@glib.example", 6),
                            ("Hild Glib", "hild@glib.example", 5),
                            ("Tracey Dev", "", 4)]),
    "nginx": ("2020-02-02", [("Ivan Server", "ivan@nginx.example", 7),
                             ("Jana Server", "jana@nginx.example", 3)]),
}

# slug -> [(relative path, line count or b"binary")]
WORKTREES: dict[str, list[tuple[str, object]]] = {
    "zlib": [("README", 5), ("inflate.c", 42), ("blob.bin", b"binary")],
    "openssl": [("README.md", 12), ("ssl/ssl_lib.c", 180), ("crypto/evp.c", 96)],
    "expat": [("README", 4), ("lib/xmlparse.c", 77)],
    "gdbm": [("README", 6), ("src/gdbm_open.c", 31)],
    "curl": [("README.md", 9), ("lib/url.c", 120), ("lib/easy.c", 55)],
    "cpython": [("README.rst", 20), ("Python/ceval.c", 400), ("Lib/functools.py", 130)],
    "perl5": [("README", 10), ("perl.c", 210)],
    "systemd": [("README.md", 15), ("src/core/main.c", 260), ("units/basic.target", 8)],
    "glib": [("README.md", 7), ("glib/gmain.c", 150)],
    "nginx": [("README", 3), ("src/core/nginx.c", 66)],
}


def write_graph() -> None:
    nodes = []
    for pid, (version, licenses, _) in PACKAGES.items():
        name = "python3" if pid.startswith("python3") else pid
        nodes.append({"id": pid, "name": name, "version": version, "licenses": licenses})
    edges = [
        {"from": pid, "to": dep, "label": "DEPENDS_ON"}
        for pid, (_, _, deps) in PACKAGES.items()
        for dep in deps
    ]
    doc = {"nodes": nodes, "edges": edges}
    (OUT / "graph.json").write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def write_curated() -> None:
    with (OUT / "curated.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["package_id", "repo_url", "language", "category", "backer",
                         "debian_source", "excluded", "exclusion_reason"])
        for pid in PACKAGES:
            language, category, backer, debian, slug, reason = CURATION[pid]
            writer.writerow([
                pid,
                REPO.format(slug) if slug else "",
                language,
                category,
                backer,
                debian,
                "true" if reason else "false",
                reason,
            ])


def write_tracker() -> None:
    (OUT / "tracker.json").write_text(json.dumps(TRACKER, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_repos() -> None:
    repos = OUT / "repos"
    if repos.exists():
        shutil.rmtree(repos)
    repos.mkdir(parents=True)
    day = 86400
    for slug, (first_date, authors) in HISTORIES.items():
        start = int(datetime.strptime(first_date, "%Y-%m-%d").replace(tzinfo=timezone.utc).timestamp())
        remaining = [list(a) for a in authors]
        lines = []
        ts = start
        # First commit always belongs to the top author; afterwards rotate
        # through authors with commits left so activity spreads over time.
        while any(r[2] > 0 for r in remaining):
            for entry in remaining:
                if entry[2] <= 0:
                    continue
                lines.append(f"{ts}\t{entry[1]}\t{entry[0]}")
                entry[2] -= 1
                ts += 37 * day
        # exercise case-insensitive email merging in the densest history
        if slug == "zlib":
            lines[-1] = lines[-1].replace("alice@zlib.example", "ALICE@zlib.example")
        (repos / f"{slug}.commits.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

        tree = repos / slug
        for relpath, content in WORKTREES[slug]:
            path = tree / relpath
            path.parent.mkdir(parents=True, exist_ok=True)
            if isinstance(content, bytes):
                path.write_bytes(b"\x00\x01\x02" + content)
            else:
                body = "".join(f"line {i + 1} of {relpath}\n" for i in range(content))
                path.write_text(body, encoding="utf-8")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    write_graph()
    write_curated()
    write_tracker()
    write_repos()
    print(f"fixture written under {OUT}")


if __name__ == "__main__":
    main()
