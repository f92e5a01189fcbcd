// Serves a JSONL fixture of comment records over the archive API.
#include <iostream>

#include <CLI11.hpp>

#include "mbti/error.hpp"
#include "mbti/harvest.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Replayable mock comment archive", "mbti-mock-archive"};
  std::string fixture, host = "127.0.0.1", endpoint = "/comments";
  int port = 8080;
  app.add_option("--fixture", fixture, "Comment records JSONL")->required()->check(CLI::ExistingFile);
  app.add_option("--host", host);
  app.add_option("--port", port);
  app.add_option("--endpoint", endpoint);
  CLI11_PARSE(app, argc, argv);
  try {
    mbti::harvest::MockArchive archive(mbti::harvest::MockArchive::load_fixture(fixture), endpoint);
    std::cerr << "serving " << fixture << " on http://" << host << ":" << port << endpoint << "\n";
    archive.listen_blocking(host, port);
  } catch (const mbti::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
