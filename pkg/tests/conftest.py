import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from urllib.parse import parse_qs, urlparse

import pytest

from korpusmap.corpus import Corpus, Document, Institution


def make_doc(doc_id, institution=Institution.SupremeCourt, keywords=(), text="lorem ipsum dolor"):
    return Document(id=doc_id, institution=institution, keywords=tuple(keywords), text=text)


def make_corpus(n_per_institution, institutions=None, text="lorem ipsum dolor"):
    institutions = institutions or [
        Institution.SupremeCourt,
        Institution.ConstitutionalTribunal,
        Institution.CommonCourt,
        Institution.NationalAppealChamber,
    ]
    docs = []
    for inst in institutions:
        for i in range(n_per_institution):
            docs.append(make_doc(f"{inst.name}-{i}", inst, text=text))
    return Corpus(documents=docs, provenance="test")


class _PagedHandler(BaseHTTPRequestHandler):
    server_version = "MockJudgmentAPI/1.0"

    def do_GET(self):
        query = parse_qs(urlparse(self.path).query)
        page = int(query.get("page", ["0"])[0])
        self.server.request_count += 1
        payload = self.server.pages.get(page, {"items": []})
        body = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def mock_api():
    """Local HTTP server serving configurable JSON pages."""
    server = HTTPServer(("127.0.0.1", 0), _PagedHandler)
    server.pages = {}
    server.request_count = 0
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield server
    finally:
        server.shutdown()
        thread.join(timeout=5)


def api_url(server) -> str:
    return f"http://127.0.0.1:{server.server_address[1]}/judgments"
