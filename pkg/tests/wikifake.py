"""In-memory stand-in for the MediaWiki action API, REST API and pageviews service.

``FakeSession`` answers ``get(url, params=..., headers=..., timeout=...)``
like ``requests.Session`` does, paginating link lists so continuation is
exercised. ``MINI_WIKI`` is the small wiki recorded into
``tests/fixtures/wiki_cache``.
"""

from __future__ import annotations

import calendar
import json
import zlib
from collections import Counter
from urllib.parse import unquote

from netcorr.wiki import API_URL, PAGEVIEWS_URL, REST_URL

NS_PREFIXES = {"Category:": 14, "Template:": 10, "Help:": 12, "File:": 6}


def _ns(title):
    for p, ns in NS_PREFIXES.items():
        if title.startswith(p):
            return ns
    return 0


# title -> (outlinks, daily views, watchers or None, length, edits)
MINI_WIKI = {
    "Network science": (
        ["Graph theory", "Complex network", "Scale-free network", "Small-world network",
         "Social network", "YouTube", "Community structure", "Centrality", "Random graph",
         "Paul Erdős", "Law of mass action", "Army Research Laboratory", "Search engine spammer",
         "Uncreated page", "Category:Network theory", "Network science"],
        400, 800, 52000, 3100),
    "Graph theory": (["Random graph", "Centrality", "Paul Erdős", "Complex network"], 900, 1200, 41000, 5200),
    "Complex network": (["Scale-free network", "Small-world network", "Community structure",
                         "Graph theory", "Network science"], 150, 300, 23000, 900),
    "Scale-free network": (["Complex network", "Random graph"], 220, 410, 30000, 1400),
    "Small-world network": (["Complex network", "Social network"], 180, 350, 28000, 1100),
    "Social network": (["YouTube", "Community structure", "Centrality", "Small-world network"],
                       1500, 1700, 65000, 4800),
    "YouTube": (["Social network"], 100000, 9000, 250000, 60000),
    "Community structure": (["Complex network", "Social network"], 60, 120, 19000, 500),
    "Centrality": (["Graph theory", "Social network"], 500, 600, 38000, 1800),
    "Random graph": (["Paul Erdős", "Graph theory"], 120, 250, 15000, 700),
    "Paul Erdős": (["Random graph", "Graph theory"], 3000, 2200, 70000, 6500),
    "Law of mass action": (["Chemistry"], 700, 400, 22000, 1000),
    "Army Research Laboratory": (["Complex network"], 90, None, 31000, 1200),
    "Search engine spammer": (["YouTube"], 0, None, 900, 40),
    "Chemistry": (["Law of mass action"], 20000, 5000, 120000, 30000),
}

# Undirected EgoMinusEgo edges of "Network science" in MINI_WIKI, worked out by hand.
EXPECTED_EDGES = {
    ("Graph_theory", "Random_graph"), ("Graph_theory", "Centrality"), ("Graph_theory", "Paul_Erdős"),
    ("Graph_theory", "Complex_network"), ("Complex_network", "Scale-free_network"),
    ("Complex_network", "Small-world_network"), ("Complex_network", "Community_structure"),
    ("Scale-free_network", "Random_graph"), ("Small-world_network", "Social_network"),
    ("Social_network", "YouTube"), ("Social_network", "Community_structure"),
    ("Social_network", "Centrality"), ("Random_graph", "Paul_Erdős"),
    ("Army_Research_Laboratory", "Complex_network"), ("Search_engine_spammer", "YouTube"),
}
EXPECTED_MEMBERS = {
    "Graph theory", "Complex network", "Scale-free network", "Small-world network", "Social network",
    "YouTube", "Community structure", "Centrality", "Random graph", "Paul Erdős",
    "Law of mass action", "Army Research Laboratory", "Search engine spammer",
}


class FakeResponse:
    def __init__(self, status, body, headers=None):
        self.status_code = status
        self._body = body
        self.headers = headers or {}

    def json(self):
        if self._body is None:
            raise ValueError("no body")
        return json.loads(json.dumps(self._body))


class FakeSession:
    """Serve ``pages`` with link lists paginated ``page_size`` at a time.

    ``fail_first`` maps a URL substring to a number of initial 429 replies.
    """

    def __init__(self, pages=None, page_size=5, fail_first=None, retry_after="0"):
        self.pages = MINI_WIKI if pages is None else pages
        self.page_size = page_size
        self.fail_first = dict(fail_first or {})
        self.retry_after = retry_after
        self.calls = []
        self.user_agents = set()
        self._fails = Counter()

    def get(self, url, params=None, headers=None, timeout=None):
        params = dict(params or {})
        self.calls.append((url, params))
        self.user_agents.add((headers or {}).get("User-Agent"))
        for frag, n in self.fail_first.items():
            if frag in url + json.dumps(params, ensure_ascii=False) and self._fails[frag] < n:
                self._fails[frag] += 1
                return FakeResponse(429, {"error": "rate"}, {"Retry-After": self.retry_after})
        if url == API_URL:
            return self._api(params)
        if url.startswith(REST_URL):
            return self._rest(url)
        if url.startswith(PAGEVIEWS_URL):
            return self._views(url)
        return FakeResponse(404, None)

    def _page(self, title):
        return self.pages.get(title)

    def _api(self, p):
        assert p.get("action") == "query" and p.get("format") == "json"
        titles = p["titles"].split("|")
        if p.get("prop") == "links":
            (title,) = titles
            page = self._page(title)
            if page is None:
                return FakeResponse(200, {"query": {"pages": [{"ns": 0, "title": title, "missing": True}]}})
            links = [t for t in page[0] if p.get("plnamespace") is None or _ns(t) == int(p["plnamespace"])]
            start = int(p.get("plcontinue", "0|0").split("|")[1])
            batch = links[start:start + self.page_size]
            body = {"query": {"pages": [{"pageid": zlib.crc32(title.encode()) % 10**6, "ns": 0, "title": title,
                                         "links": [{"ns": _ns(t), "title": t} for t in batch]}]}}
            if start + self.page_size < len(links):
                body["continue"] = {"plcontinue": f"{title}|{start + self.page_size}", "continue": "||"}
            return FakeResponse(200, body)
        if p.get("prop") == "info":
            pages = []
            for t in titles:
                page = self._page(t)
                if page is None:
                    pages.append({"ns": _ns(t), "title": t, "missing": True})
                    continue
                rec = {"pageid": len(pages) + 1, "ns": 0, "title": t, "length": page[3]}
                if page[2] is not None:
                    rec["watchers"] = page[2]
                pages.append(rec)
            return FakeResponse(200, {"batchcomplete": True, "query": {"pages": pages}})
        return FakeResponse(200, {"error": {"code": "badvalue", "info": "unsupported"}})

    def _rest(self, url):
        title = unquote(url[len(REST_URL) + len("/page/"):].split("/history")[0]).replace("_", " ")
        page = self._page(title)
        if page is None:
            return FakeResponse(404, {"messageTranslations": {}, "httpCode": 404})
        return FakeResponse(200, {"count": page[4], "limit": False})

    def _views(self, url):
        tail = url[len(PAGEVIEWS_URL) + 1:]
        enc_title, _, start, end = tail.split("/")
        title = unquote(enc_title).replace("_", " ")
        page = self._page(title)
        if page is None or page[1] == 0:
            return FakeResponse(404, {"type": "not found", "detail": "no data"})
        year, mon = int(start[:4]), int(start[4:6])
        days = calendar.monthrange(year, mon)[1]
        items = [{"article": enc_title, "timestamp": f"{start[:6]}{d:02d}00", "views": page[1] + d % 3}
                 for d in range(1, days + 1)]
        return FakeResponse(200, {"items": items})


def expected_month_views(title, year=2024, mon=4):
    page = MINI_WIKI[title]
    if page[1] == 0:
        return 0
    days = calendar.monthrange(year, mon)[1]
    return sum(page[1] + d % 3 for d in range(1, days + 1))
