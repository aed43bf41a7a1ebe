"""Resonance MCP Server.

This is the main entry point for the Resonance MCP server. It exposes the
boundary integral resonance solver through MCP tools.

Features:
- Resonance search inside contours of the complex frequency plane
- Polarization tensors of inclusion shapes
- Epsilon sweeps comparing tracked resonances with the asymptotic shift
- Validation suite and the disk dispersion oracle
"""

import logging
import time
from collections.abc import Callable
from dataclasses import asdict
from functools import wraps
from typing import Any

from fastmcp import FastMCP

from . import __version__
from .api import polarization, resonances, sweep, validation
from .config import get_solver_settings
from .types import HealthStatus

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

SERVER_NAME = "Resonance MCP Server"

# Initialize the MCP server
mcp = FastMCP(
    name=SERVER_NAME,
    instructions="""
    This MCP server computes scattering resonances of a 2D body whose interior
    contains small anisotropic inclusions, and checks them against asymptotics.

    **Resonance Tools:**
    - compute_resonances: poles of the transfer operator inside a contour
    - transfer_singular_values: sigma_min of T(omega) along a line
    - disk_dispersion_roots: closed-form disk resonances (Bessel dispersion relation)

    **Inclusion Tools:**
    - compute_polarization_tensor: polarization tensor of a shape and contrast
    - run_epsilon_sweep: follow a resonance as the inclusions shrink

    **Configuration:**
    - Tools accept an optional run configuration document; the bundled scene is
      the unit disk with gamma1 = 2, gamma2 = 1 and one inclusion at (0.3, 0)
    - Grid sizes, contour points and the seed come from RESONANCE_* variables

    Start by using health_check, then run_validation on the bundled scene.
    """,
)


def timing_middleware(func: Callable) -> Callable:
    """Middleware to log execution time for tools."""

    @wraps(func)
    async def wrapper(*args: Any, **kwargs: Any) -> Any:
        start_time = time.time()
        try:
            result = await func(*args, **kwargs)
            elapsed = time.time() - start_time
            logger.info(f"{func.__name__} completed in {elapsed:.3f}s")
            return result
        except Exception as e:
            elapsed = time.time() - start_time
            logger.error(f"{func.__name__} failed after {elapsed:.3f}s: {e}")
            raise

    return wrapper


# =============================================================================
# TOOLS
# =============================================================================


async def health_check() -> HealthStatus:
    """Check the health status of the Resonance MCP server.

    Returns:
        Dictionary with server status and the resolved solver settings.
    """
    try:
        settings = get_solver_settings()
        resolved = asdict(settings)
        resolved["output_dir"] = str(settings.output_dir)
        return {
            "status": "healthy",
            "server": SERVER_NAME,
            "version": __version__,
            "settings": resolved,
        }
    except Exception as e:
        return {
            "status": "unhealthy",
            "server": SERVER_NAME,
            "version": __version__,
            "error": str(e),
            "message": "Failed to load solver settings. Check RESONANCE_* environment variables.",
        }


mcp.tool()(health_check)


# Resonance search
mcp.tool()(timing_middleware(resonances.compute_resonances))
mcp.tool()(timing_middleware(resonances.transfer_singular_values))
mcp.tool()(timing_middleware(resonances.disk_dispersion_roots))

# Inclusions
mcp.tool()(timing_middleware(polarization.compute_polarization_tensor))
mcp.tool()(timing_middleware(sweep.run_epsilon_sweep))

# Validation
mcp.tool()(timing_middleware(validation.run_validation))


# =============================================================================
# RESOURCES
# =============================================================================


@mcp.resource("resonance://status")
async def get_status() -> str:
    """Get the current server status."""
    return f"{SERVER_NAME} {__version__} is running"


@mcp.resource("resonance://conventions")
async def get_conventions() -> str:
    """Normalization and sign conventions used by every tool."""
    return """
    **Kernels:** G solves (gamma Laplace + omega^2) G = -delta:
    G = (i / (4 gamma)) H0(k r), k = omega / sqrt(gamma); Laplace G = -log r / (2 pi gamma).

    **Layer potentials:** S, D, K' use the principal value on the boundary.
    Laplace D[1] = -1/2; interior trace of D is D - 1/(2 gamma), exterior D + 1/(2 gamma).

    **DtN map:** N f = normal derivative of the interior solution with trace f,
    from S N f = (D + 1/(2 gamma1)) f.

    **Transfer operator:** T = c I - gamma2 D + gamma1 S N with the gamma2 kernel.
    jump_mode "derived" uses c = 1/2; "literal" uses c = 1 - gamma2/2.

    **Polarization tensor:** (lambda_c - K') psi = tau/(gamma - tau) nu with the
    Laplace Neumann-Poincare operator; the unit disk gives 2 pi tau/(gamma + tau) I.
    contrast "trace" uses tau = tr(gamma_D), "mean" uses tr(gamma_D)/2.

    **Shift normalization:** shift_mode "residue" (default) divides by <T' u, u*>;
    "averaged" uses the averaged formula without the residue factor.

    **Resonances** lie in Im(omega) < 0; complex values are reported as re/im pairs.
    """


# =============================================================================
# PROMPTS
# =============================================================================


@mcp.prompt()
def getting_started() -> str:
    """A prompt to help users get started with the Resonance MCP server."""
    return """
    Welcome to the Resonance MCP Server!

    **Available Tools:**
    1. health_check - Verify settings
    2. run_validation - Invariant suite on the bundled unit disk
    3. compute_resonances - Resonances inside a contour
    4. disk_dispersion_roots - Reference disk resonances
    5. compute_polarization_tensor - Polarization tensor of a shape
    6. run_epsilon_sweep - Resonance shifts as inclusions shrink
    7. transfer_singular_values - sigma_min scan of T(omega)

    **Getting Started:**
    1. Call health_check
    2. Call run_validation() and confirm every check passed
    3. compute_resonances(center_re=2.0, center_im=-0.5, radius=1.0)
    4. Compare with disk_dispersion_roots(gamma1=2.0, gamma2=1.0)
    """


@mcp.prompt()
def sweep_workflow() -> str:
    """Guide for studying resonance shifts caused by small inclusions."""
    return """
    **Epsilon Sweep Workflow:**

    1. **Pick a resonance:**
       - compute_resonances on the unperturbed body (epsilon = 0)
       - choose a simple resonance (multiplicity 1) close to the real axis

    2. **Check the inclusion signature:**
       - compute_polarization_tensor(shape, gamma_bg=gamma1, trace_gamma_d=...)

    3. **Run the sweep:**
       - run_epsilon_sweep(epsilons=[0.2, 0.1, 0.05], target_re=..., target_im=...)
       - residual_slope > 2 means the measured shift agrees with the prediction to o(eps^2)

    4. **Interpret:**
       - operator_slope close to 2 confirms ||T_eps - T|| = O(eps^2)
       - a transparent inclusion (trace_gamma_d = 2 gamma1 with contrast "mean") gives no shift
    """


# =============================================================================
# MAIN
# =============================================================================


def main() -> None:
    """Run the Resonance MCP server."""
    logger.info("Starting Resonance MCP Server...")
    mcp.run()


if __name__ == "__main__":
    main()
