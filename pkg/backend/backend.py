"""FastAPI app mounting the hypstructures routers"""
from fastapi import FastAPI
from routers import classify, flip, health, lemmas, poset, projection

app = FastAPI(title="hypstructures")

app.include_router(health.router, tags=["Health"])
app.include_router(classify.router, tags=["Classification"])
app.include_router(projection.router, prefix="/projection", tags=["Projection Complexes"])
app.include_router(flip.router, tags=["Flip Trees"])
app.include_router(poset.router, tags=["Posets"])
app.include_router(lemmas.router, prefix="/lemmas", tags=["Lemmas"])
