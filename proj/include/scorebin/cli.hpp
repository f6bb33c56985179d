#pragma once

// Command-line front end. Kept header-only so tests can drive run_cli
// in-process; tools/scorebin.cpp is a thin main() around it.
//
// Exit codes: 0 success, 1 internal error, 2 I/O failure, 64 usage error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "scorebin/applications.hpp"
#include "scorebin/error.hpp"
#include "scorebin/image.hpp"
#include "scorebin/io.hpp"
#include "scorebin/parallel.hpp"
#include "scorebin/sauvola.hpp"

namespace scorebin::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kIo = 2, kUsage = 64 };

enum class Subcommand { sauvola, binarize, score, clean, texture };

inline const char* to_string(Subcommand s) {
  switch (s) {
    case Subcommand::sauvola: return "sauvola";
    case Subcommand::binarize: return "binarize";
    case Subcommand::score: return "score";
    case Subcommand::clean: return "clean";
    case Subcommand::texture: return "texture";
  }
  return "?";
}

struct RunConfig {
  Subcommand subcommand = Subcommand::binarize;
  std::filesystem::path input_path;
  std::filesystem::path output_path;
  int window = 31;
  double k = 0.2;
  std::optional<double> tau = 0.7;
  std::optional<Connectivity> connectivity = Connectivity::eight;
  double gamma = 1.0;
  Rgb background{255, 255, 255};
  std::filesystem::path texture_path;
  TextureFit fit = TextureFit::resize;
  ScoreKind score_kind = ScoreKind::foreground;
  std::optional<std::filesystem::path> dump_stats;
};

/// Raised for parameter problems detected outside CLI11's own parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::optional<double> parse_tau(const std::string& text) {
  if (text == "off") return std::nullopt;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v >= 0.0 && v <= 1.0)) {
    throw UsageError("--tau: expected a number in [0, 1] or 'off', got '" + text + "'");
  }
  return v;
}

inline std::optional<Connectivity> parse_connectivity(const std::string& text) {
  if (text == "4") return Connectivity::four;
  if (text == "8") return Connectivity::eight;
  if (text == "off") return std::nullopt;
  throw UsageError("--connectivity: expected 4, 8 or off, got '" + text + "'");
}

inline int parse_channel(const std::string& item) {
  std::size_t used = 0;
  int v = -1;
  try {
    v = std::stoi(item, &used);
  } catch (const std::exception&) {
    return -1;
  }
  return used == item.size() && v >= 0 && v <= 255 ? v : -1;
}

inline Rgb parse_background(const std::string& text) {
  std::vector<int> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(parse_channel(item));
  const bool valid = (parts.size() == 1 || parts.size() == 3) &&
                     std::none_of(parts.begin(), parts.end(), [](int v) { return v < 0; });
  if (!valid) {
    throw UsageError("--background: expected an intensity 0..255 or r,g,b, got '" + text + "'");
  }
  const auto c = [&](std::size_t i) { return static_cast<std::uint8_t>(parts[i]); };
  return parts.size() == 1 ? Rgb{c(0), c(0), c(0)} : Rgb{c(0), c(1), c(2)};
}

/// SCOREBIN_THREADS, when set, must be a positive integer.
inline void apply_thread_env() {
  const char* raw = std::getenv("SCOREBIN_THREADS");
  if (raw == nullptr || *raw == '\0') return;
  const std::string text(raw);
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || v <= 0 || v > 4096) {
    throw UsageError("SCOREBIN_THREADS: expected a positive integer, got '" + text + "'");
  }
  set_max_threads(static_cast<unsigned>(v));
}

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound:
    case ErrorCode::IoError:
    case ErrorCode::MalformedFile:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::EmptyTexture:
      return kIo;
    case ErrorCode::InvalidParam:
    case ErrorCode::FormatMismatch:
      return kUsage;
    default:
      return kInternal;
  }
}

inline std::string describe(const std::optional<double>& tau) {
  return tau ? std::to_string(*tau) : std::string("off");
}

inline std::string describe(const std::optional<Connectivity>& c) {
  if (!c) return "off";
  return *c == Connectivity::four ? "4" : "8";
}

}  // namespace detail

/// Parses argv into a RunConfig. Returns std::nullopt after printing help.
/// Throws CLI::ParseError or UsageError on bad input.
inline std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  RunConfig cfg;
  CLI::App app{"Sauvola binarization with per-pixel foreground/background confidence", "scorebin"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  std::string tau_text = "0.7";
  std::string connectivity_text = "8";
  std::string background_text = "255";
  std::string fit_text = "resize";
  std::string kind_text = "fg";
  std::string dump_stats;

  auto add_common = [&](CLI::App* sub, Subcommand which) {
    sub->callback([&cfg, which] { cfg.subcommand = which; });
    sub->add_option("input", cfg.input_path, "Input image (PNG, PGM P5 or PPM P6)")->required();
    sub->add_option("-o,--output", cfg.output_path, "Output image; format follows the extension")
        ->required();
    sub->add_option("--window", cfg.window, "Window side length n (odd, >= 3)")
        ->capture_default_str()
        ->check([](const std::string& s) -> std::string {
          try {
            const int n = std::stoi(s);
            if (n >= 3 && n % 2 == 1) return {};
          } catch (const std::exception&) {
          }
          return "window must be an odd integer >= 3";
        });
    sub->add_option("--k", cfg.k, "Sauvola sensitivity k in [0, 1]")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0).description(""));
    sub->add_option("--dump-stats", dump_stats,
                    "Write run parameters and image extrema as key=value lines to this path");
  };

  auto* sauvola = app.add_subcommand("sauvola", "Plain Sauvola binarization");
  add_common(sauvola, Subcommand::sauvola);

  auto* binarize = app.add_subcommand("binarize", "Sauvola binarization with confidence rescue");
  add_common(binarize, Subcommand::binarize);
  binarize->add_option("--tau", tau_text, "Rescue threshold on foreground confidence, or 'off'")
      ->capture_default_str();
  binarize->add_option("--connectivity", connectivity_text,
                       "Rescued pixels must connect to Sauvola foreground: 4, 8 or off")
      ->capture_default_str();

  auto* score = app.add_subcommand("score", "Export a confidence map as an 8-bit image");
  add_common(score, Subcommand::score);
  score->add_option("--kind", kind_text, "Which score to export: fg or bg")
      ->capture_default_str()
      ->check(CLI::IsMember({"fg", "bg"}));

  auto* clean = app.add_subcommand("clean", "Blend the background toward a flat colour");
  add_common(clean, Subcommand::clean);
  clean->add_option("--gamma", cfg.gamma, "Blend exponent applied to background confidence (> 0)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  clean->add_option("--background", background_text, "Background colour: intensity or r,g,b")
      ->capture_default_str();

  auto* texture = app.add_subcommand("texture", "Composite the page over a texture image");
  add_common(texture, Subcommand::texture);
  texture->add_option("--texture", cfg.texture_path, "Texture image")->required();
  texture->add_option("--fit", fit_text, "How the texture covers the page: resize or tile")
      ->capture_default_str()
      ->check(CLI::IsMember({"resize", "tile"}));

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  }

  cfg.tau = detail::parse_tau(tau_text);
  cfg.connectivity = detail::parse_connectivity(connectivity_text);
  cfg.background = detail::parse_background(background_text);
  cfg.fit = fit_text == "tile" ? TextureFit::tile : TextureFit::resize;
  cfg.score_kind = kind_text == "bg" ? ScoreKind::background : ScoreKind::foreground;
  if (!dump_stats.empty()) cfg.dump_stats = dump_stats;
  return cfg;
}

namespace detail {

inline void write_stats(const RunConfig& cfg, const AnyImage& input, const Extrema& extrema,
                        const std::optional<BinaryImage>& binary) {
  std::ostringstream s;
  const auto channels = std::holds_alternative<ColorImage>(input) ? 3 : 1;
  const auto [w, h] = std::visit([](const auto& i) { return std::pair{i.width(), i.height()}; }, input);
  s << "subcommand=" << to_string(cfg.subcommand) << '\n'
    << "input=" << cfg.input_path.string() << '\n'
    << "output=" << cfg.output_path.string() << '\n'
    << "width=" << w << '\n'
    << "height=" << h << '\n'
    << "channels=" << channels << '\n'
    << "window=" << cfg.window << '\n'
    << "k=" << cfg.k << '\n';
  if (cfg.subcommand == Subcommand::binarize) {
    s << "tau=" << describe(cfg.tau) << '\n' << "connectivity=" << describe(cfg.connectivity) << '\n';
  }
  if (cfg.subcommand == Subcommand::clean) s << "gamma=" << cfg.gamma << '\n';
  s << "min=" << int(extrema.min_val) << '\n'
    << "max=" << int(extrema.max_val) << '\n'
    << "dynamic_range=" << dynamic_range(extrema) << '\n';
  if (binary) s << "foreground_pixels=" << foreground_count(*binary) << '\n';
  const std::string text = s.str();
  write_file_atomic(*cfg.dump_stats,
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace detail

/// Executes one configured run. Library errors propagate as scorebin::Error.
inline void run(const RunConfig& cfg) {
  const SauvolaParams sp{cfg.k, WindowSpec(cfg.window)};
  const RescueParams rp{cfg.tau, cfg.connectivity.has_value(),
                        cfg.connectivity.value_or(Connectivity::eight)};
  const CleanupParams cp{cfg.gamma, cfg.background};
  validate(sp);
  validate(rp);
  validate(cp);
  const ImageFormat format = format_from_path(cfg.output_path);

  // Reject channel/format combinations before touching the input.
  const bool gray_output = cfg.subcommand == Subcommand::sauvola ||
                           cfg.subcommand == Subcommand::binarize || cfg.subcommand == Subcommand::score;
  if (gray_output && format == ImageFormat::ppm) {
    throw Error(ErrorCode::FormatMismatch, to_string(cfg.subcommand) + std::string(" writes grayscale; use .png or .pgm"));
  }
  if (cfg.subcommand == Subcommand::texture && format == ImageFormat::pgm) {
    throw Error(ErrorCode::FormatMismatch, "texture writes color; use .png or .ppm");
  }

  const AnyImage input = load_image(cfg.input_path);
  std::optional<ColorImage> texture;
  if (cfg.subcommand == Subcommand::texture) {
    AnyImage t = load_image(cfg.texture_path);
    texture = std::holds_alternative<ColorImage>(t) ? std::get<ColorImage>(std::move(t))
                                                    : to_color(std::get<GrayImage>(t));
  }
  if (cfg.subcommand == Subcommand::clean) {
    const bool color = std::holds_alternative<ColorImage>(input);
    if (color && format == ImageFormat::pgm) {
      throw Error(ErrorCode::FormatMismatch, "color input cannot be cleaned into .pgm");
    }
    if (!color && format == ImageFormat::ppm) {
      throw Error(ErrorCode::FormatMismatch, "grayscale input cannot be cleaned into .ppm");
    }
  }

  const GrayImage gray = as_grayscale(input);
  std::optional<BinaryImage> binary;
  Bytes encoded;
  Extrema extrema;

  if (cfg.subcommand == Subcommand::sauvola) {
    extrema = global_extrema(gray);
    binary = sauvola_binarize(gray, sp);
    encoded = encode_image(*binary, format);
  } else {
    SauvolaAnalysis a = analyze(gray, sp);
    extrema = a.extrema;
    switch (cfg.subcommand) {
      case Subcommand::binarize:
        binary = score_binarize(a.binary, a.confidence, rp);
        encoded = encode_image(*binary, format);
        break;
      case Subcommand::score:
        encoded = encode_image(export_score_map(a.confidence, cfg.score_kind), format);
        break;
      case Subcommand::clean:
        encoded = std::visit(
            [&](const auto& img) { return encode_image(cleanup(img, a.confidence, cp), format); }, input);
        break;
      case Subcommand::texture:
        encoded = std::visit(
            [&](const auto& img) {
              return encode_image(texture_transfer(img, a.confidence, *texture, cfg.fit), format);
            },
            input);
        break;
      case Subcommand::sauvola:
        break;
    }
  }

  write_file_atomic(cfg.output_path, encoded);
  if (cfg.dump_stats) detail::write_stats(cfg, input, extrema, binary);
}

/// Full CLI entry point: parse, run, map failures onto exit codes.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  try {
    detail::apply_thread_env();
    const auto cfg = parse_args(argc, argv, out);
    if (!cfg) return kOk;
    run(*cfg);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "scorebin: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "scorebin: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "scorebin: " << e.what() << "\n";
    return detail::exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "scorebin: internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace scorebin::cli
