import streamlit as st


# Module aus dem Projekt
from src.determinant_certificate import elusive_certificate, structural_checks, verify_semi_main
from src.exact_linalg import FieldSpec
from src.exterior import KoszulContext
from src.flattening import full_blowup_check, lower_bound
from src.tensor_io import TensorFormatError, builtin, parse

# Session-State initialisieren:
# - certificate: letztes RankCertificate (als dict)
# - koszul: letzter Verifikationsbericht für det A(t)
if "certificate" not in st.session_state:
    st.session_state["certificate"] = None
if "koszul" not in st.session_state:
    st.session_state["koszul"] = None

# ---------------------------------------------------------
# Titel der Seite
# ---------------------------------------------------------
st.title("Koszul-Flattening: Border-Rang-Zertifikate")
st.markdown(
    "Berechnet exakte untere Schranken für den Border-Rang von Tensoren in "
    "K^d ⊗ K^d ⊗ K^d über ℚ oder GF(p) und prüft die Invertierbarkeit der "
    "Toeplitz-Blow-ups."
)

# ---------------------------------------------------------
# Abschnitt: Tensor wählen
# ---------------------------------------------------------
st.header("Tensor")

quelle = st.radio("Quelle", ["Eingebaut", "Dokument hochladen"], horizontal=True)
field_tag = st.text_input("Körper (Q oder GF:p)", value="Q")

name = None
uploaded = None
if quelle == "Eingebaut":
    name = st.selectbox("Eingebauter Tensor", ["det3", "perm3", "unit:3", "unit:5", "toeplitz_sum:4", "toeplitz_sum:6"])
else:
    uploaded = st.file_uploader("Tensordokument (.tns)", type=["tns", "txt"])

projections = st.number_input("Zusätzliche Zufallsprojektionen (nur d gerade)", min_value=0, max_value=50, value=0)
seed = st.text_input("Seed", value="0")

# ---------------------------------------------------------
# Button löst die Flattening-Rechnung aus
# ---------------------------------------------------------
if st.button("Schranke berechnen"):
    with st.spinner("φ_L(T) wird aufgebaut und exakt eliminiert ..."):
        try:
            field = FieldSpec.from_tag(field_tag)
            if name:
                T = builtin(name, field)
            elif uploaded is not None:
                T = parse(uploaded.getvalue().decode("utf-8"), label=uploaded.name)
            else:
                st.warning("Bitte ein Tensordokument hochladen.")
                st.stop()
            st.session_state["certificate"] = lower_bound(T, projections=int(projections), seed=seed).to_dict()
        except (TensorFormatError, ValueError) as exc:
            st.session_state["certificate"] = None
            st.error(f"❌ Eingabe ungültig: {exc}")

certificate = st.session_state["certificate"]
if certificate:
    st.subheader("Zertifikat")
    st.success(
        f"✅ brk(T) ≥ {certificate['lower_bound']}  "
        f"(Rang {certificate['flattening_rank']} / rk(X_L) = {certificate['subspace_rank']})"
    )
    if certificate["projection"]:
        st.write("Projektion:", certificate["projection"])
    with st.expander("Details"):
        st.json(certificate)

# ---------------------------------------------------------
# Abschnitt: det A(t) und voller Blow-up
# ---------------------------------------------------------
st.markdown("---")
st.header("Koszul-Verifikation")

m = st.selectbox("m", [3, 5, 7, 9], index=0)
k_field_tag = st.text_input("Körper für die Verifikation", value="GF:101")
samples = st.number_input("Zufallspunkte", min_value=0, max_value=100, value=10)

if st.button("Verifizieren"):
    with st.spinner("Elusive-Zertifikat und Determinanten werden berechnet ..."):
        try:
            ctx = KoszulContext.for_m(int(m))
            field = FieldSpec.from_tag(k_field_tag)
            st.session_state["koszul"] = {
                "certificate": elusive_certificate(ctx).to_dict(),
                "structure": structural_checks(ctx),
                "verification": verify_semi_main(ctx, field, samples=int(samples), seed=seed),
                "blowup": full_blowup_check(ctx, field),
            }
        except ValueError as exc:
            st.session_state["koszul"] = None
            st.error(f"❌ Eingabe ungültig: {exc}")

koszul = st.session_state["koszul"]
if koszul:
    verification = koszul["verification"]
    st.write("k =", koszul["certificate"]["k"], " | det A(1,…,1) =", verification["det_at_ones"])
    if verification["all_ok"] and koszul["structure"]["all_ok"]:
        st.success(f"✅ det A(t) = k·(∏tᵢ)^C(2p,p) bestätigt für m = {verification['m']}")
    else:
        st.error("❌ Mindestens eine Prüfung ist fehlgeschlagen:")
        for check, ok in {**koszul["structure"]["checks"], **verification["checks"]}.items():
            if not ok:
                st.markdown(f"- {check}")
    if koszul["blowup"]["invertible"]:
        st.success(f"✅ Voller Blow-up ({koszul['blowup']['size']}×{koszul['blowup']['size']}) invertierbar")
    else:
        st.error(f"❌ Voller Blow-up singulär (det = {koszul['blowup']['determinant']})")
    with st.expander("Details"):
        st.json(koszul)
