"""HTTP client for the reconstruction service.

Without a base URL the client mounts the FastAPI app in-process over
an ASGI transport, so every CLI command works with no server running;
given a URL it talks to a remote service with the same payloads.
"""

from __future__ import annotations

import httpx


class ServiceError(RuntimeError):
    """Non-2xx response from the service, carrying its detail message."""


class ServiceClient:
    def __init__(self, base_url: str | None = None, timeout: float = 3600.0):
        if base_url:
            self._client = httpx.Client(base_url=base_url, timeout=timeout)
        else:
            # starlette's sync httpx bridge drives the ASGI app in-process
            import warnings

            with warnings.catch_warnings():
                warnings.filterwarnings("ignore", message=".*httpx2.*")
                from starlette.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def get(self, path: str) -> dict:
        return self._unwrap(self._client.get(path))

    def post(self, path: str, payload: dict) -> dict:
        return self._unwrap(self._client.post(path, json=payload))

    @staticmethod
    def _unwrap(resp: httpx.Response) -> dict:
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            raise ServiceError(f"{resp.status_code}: {detail}")
        return resp.json()
