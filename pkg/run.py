"""Starts the HTTP API"""
import uvicorn

from services.settings import get_settings

if __name__ == "__main__":
    settings = get_settings()
    uvicorn.run("backend.backend:app", host="127.0.0.1", port=8000, reload=True,
                log_level=settings.log_level.lower())
