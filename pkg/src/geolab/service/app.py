"""FastAPI application: health, preset listing, and scenario execution.

The service is stateless; artifacts are returned inline so clients decide
where to persist them.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, scenarios
from ..errors import GeolabError, SchemaError
from .schemas import (
    ArtifactModel,
    HealthResponse,
    PresetsResponse,
    RunRequest,
    RunResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="geolab", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.get("/presets", response_model=PresetsResponse)
    def presets():
        return PresetsResponse(presets=sorted(scenarios.PRESETS))

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest):
        if (req.preset is None) == (req.scenario is None):
            raise HTTPException(422, "provide exactly one of preset or scenario")
        try:
            if req.preset is not None:
                scenario = scenarios.get_preset(req.preset)
            else:
                scenario = scenarios.parse_config(req.scenario)[0]
            if req.seed is not None:
                scenario = scenario.model_copy(update={"seed": req.seed})
            outcome = scenarios.run_scenario(scenario)
        except SchemaError as e:
            raise HTTPException(422, str(e)) from e
        except GeolabError as e:
            # module errors the runner did not convert to exit code 2
            return RunResponse(
                exit_code=scenarios.EXIT_VERIFICATION,
                report={"error": type(e).__name__, "message": str(e)},
                artifacts=[],
            )
        return RunResponse(
            exit_code=outcome.exit_code,
            report=outcome.report,
            artifacts=[
                ArtifactModel(name=a.name, content=a.content)
                for a in outcome.artifacts
            ],
        )

    return app


app = create_app()
